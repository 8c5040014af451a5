// Exact decimal fixed-point numbers with a compile-time count of fractional
// digits, stored as a scaled 128-bit integer.
#pragma once

#include "ammfee/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ammfee {

template <int Digits>
class FixedDecimal {
    static_assert(Digits >= 0 && Digits <= 30, "unsupported precision");

public:
    using Raw = __int128;

    static constexpr Raw scale() {
        Raw s = 1;
        for (int i = 0; i < Digits; ++i) s *= 10;
        return s;
    }

    constexpr FixedDecimal() = default;

    static constexpr FixedDecimal fromRaw(Raw raw) {
        FixedDecimal d;
        d.raw_ = raw;
        return d;
    }

    static constexpr FixedDecimal fromInteger(std::int64_t v) { return fromRaw(static_cast<Raw>(v) * scale()); }

    /// Parses "[-]digits[.digits]". More fractional digits than the type holds
    /// is a ParseError rather than a silent rounding.
    static FixedDecimal parse(std::string_view text) {
        auto bad = [&](const char* why) {
            fail(ErrorCode::ParseError, "invalid decimal '" + std::string(text) + "': " + why);
        };
        std::size_t i = 0;
        bool negative = false;
        if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
        Raw whole = 0;
        Raw frac = 0;
        int fracDigits = 0;
        bool anyDigit = false;
        bool seenPoint = false;
        constexpr Raw kLimit = (static_cast<Raw>(1) << 120) / scale();
        for (; i < text.size(); ++i) {
            const char c = text[i];
            if (c == '.') {
                if (seenPoint) bad("two decimal points");
                seenPoint = true;
                continue;
            }
            if (c < '0' || c > '9') bad("unexpected character");
            anyDigit = true;
            if (seenPoint) {
                if (++fracDigits > Digits) {
                    if (c != '0') bad("too many fractional digits");
                    continue;
                }
                frac = frac * 10 + (c - '0');
            } else {
                whole = whole * 10 + (c - '0');
                if (whole > kLimit) bad("magnitude too large");
            }
        }
        if (!anyDigit) bad("no digits");
        for (int k = std::min(fracDigits, Digits); k < Digits; ++k) frac *= 10;
        const Raw raw = whole * scale() + frac;
        return fromRaw(negative ? -raw : raw);
    }

    /// Nearest representable value.
    static FixedDecimal fromDouble(double v) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "non-finite decimal");
        return fromRaw(static_cast<Raw>(std::llround(v * static_cast<double>(scale()))));
    }

    constexpr Raw raw() const { return raw_; }
    double toDouble() const { return static_cast<double>(raw_) / static_cast<double>(scale()); }

    /// Canonical text with exactly Digits fractional digits.
    std::string toString() const {
        Raw v = raw_ < 0 ? -raw_ : raw_;
        std::string frac;
        for (int i = 0; i < Digits; ++i) {
            frac.insert(frac.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        }
        std::string whole;
        do {
            whole.insert(whole.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
            v /= 10;
        } while (v != 0);
        std::string out = raw_ < 0 ? "-" + whole : whole;
        if (Digits > 0) out += "." + frac;
        return out;
    }

    constexpr auto operator<=>(const FixedDecimal&) const = default;

    constexpr FixedDecimal operator+(FixedDecimal o) const { return fromRaw(raw_ + o.raw_); }
    constexpr FixedDecimal operator-(FixedDecimal o) const { return fromRaw(raw_ - o.raw_); }
    constexpr FixedDecimal& operator+=(FixedDecimal o) {
        raw_ += o.raw_;
        return *this;
    }
    constexpr FixedDecimal& operator-=(FixedDecimal o) {
        raw_ -= o.raw_;
        return *this;
    }

    /// floor(a * b / c) on raw units, exact via a 256-bit intermediate.
    static Raw mulDivFloor(Raw a, Raw b, Raw c) {
        using boost::multiprecision::int256_t;
        if (c == 0) fail(ErrorCode::InvalidArgument, "division by zero");
        const int256_t num = toWide(a) * toWide(b);
        int256_t q = num / toWide(c);
        if ((num % toWide(c) != 0) && ((num < 0) != (c < 0))) q -= 1;
        return fromWide(q);
    }

private:
    static boost::multiprecision::int256_t toWide(Raw v) {
        using boost::multiprecision::int256_t;
        const bool neg = v < 0;
        const auto mag = static_cast<unsigned __int128>(neg ? -v : v);
        int256_t w = static_cast<std::uint64_t>(mag >> 64);
        w <<= 64;
        w += static_cast<std::uint64_t>(mag);
        return neg ? -w : w;
    }

    static Raw fromWide(const boost::multiprecision::int256_t& w) {
        using boost::multiprecision::int256_t;
        const bool neg = w < 0;
        const int256_t mag = neg ? int256_t(-w) : w;
        const auto hi = static_cast<std::uint64_t>(mag >> 64);
        const auto lo = static_cast<std::uint64_t>(mag & int256_t(~std::uint64_t{0}));
        const Raw v = static_cast<Raw>((static_cast<unsigned __int128>(hi) << 64) | lo);
        return neg ? -v : v;
    }

    Raw raw_ = 0;
};

}  // namespace ammfee
