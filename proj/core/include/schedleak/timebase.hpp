#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <span>
#include <string>

#include "schedleak/errors.hpp"

namespace schedleak {

using Ticks = std::int64_t;

/// Time span as an exact non-negative tick count.
///
/// All durations the simulator handles (job sizes, clock period c, the
/// accumulate period T, the adaptation period L, probe periods) are integer
/// tick counts, so policy and estimator arithmetic is bit-exact. The
/// reconstruction formulas rely on exact equality tests and exact ceilings,
/// which floating-point time would break.
class TickDuration {
    Ticks ticks_{0};

public:
    constexpr TickDuration() = default;
    explicit constexpr TickDuration(Ticks t) : ticks_(t) {
        if (t < 0) throw TimeOrderError("TickDuration: negative tick count");
    }

    [[nodiscard]] constexpr Ticks ticks() const noexcept { return ticks_; }

    constexpr TickDuration operator+(TickDuration rhs) const {
        return TickDuration{ticks_ + rhs.ticks_};
    }
    constexpr TickDuration operator-(TickDuration rhs) const {
        if (rhs.ticks_ > ticks_) throw TimeOrderError("TickDuration: negative difference");
        return TickDuration{ticks_ - rhs.ticks_};
    }
    constexpr TickDuration& operator+=(TickDuration rhs) {
        ticks_ += rhs.ticks_;
        return *this;
    }
    constexpr auto operator<=>(const TickDuration&) const noexcept = default;
};

/// Absolute simulation instant, in ticks since time zero.
class TickTime {
    Ticks ticks_{0};

public:
    constexpr TickTime() = default;
    explicit constexpr TickTime(Ticks t) : ticks_(t) {
        if (t < 0) throw TimeOrderError("TickTime: negative tick count");
    }

    [[nodiscard]] constexpr Ticks ticks() const noexcept { return ticks_; }

    constexpr TickTime operator+(TickDuration d) const { return TickTime{ticks_ + d.ticks()}; }
    /// Elapsed time between two instants; subtracting a later from an
    /// earlier time is an error, not a wrap-around.
    constexpr TickDuration operator-(TickTime earlier) const {
        if (earlier.ticks_ > ticks_) throw TimeOrderError("TickTime: subtracting a later time");
        return TickDuration{ticks_ - earlier.ticks_};
    }
    constexpr auto operator<=>(const TickTime&) const noexcept = default;
};

/// Exact rational number of time units, used to state configured durations
/// before a tick scale is chosen.
struct Rational {
    std::int64_t num{0};
    std::int64_t den{1};
};

/// Conversion between work/time units and ticks.
///
/// One unit is both the service time of a unit job and the unit of the
/// arrival rates; the server completes one unit of work in ticks_per_unit
/// ticks. Every configured duration must be an integer tick count under the
/// chosen scale; construction of durations fails otherwise.
class TickScale {
    Ticks ticks_per_unit_{1};

public:
    TickScale() = default;
    explicit TickScale(Ticks ticks_per_unit) : ticks_per_unit_(ticks_per_unit) {
        if (ticks_per_unit < 1) throw ConfigError("TickScale: ticks_per_unit must be >= 1");
    }

    [[nodiscard]] Ticks ticks_per_unit() const noexcept { return ticks_per_unit_; }

    [[nodiscard]] TickDuration duration(Rational units) const {
        if (units.den <= 0 || units.num < 0)
            throw NonRepresentableError("duration: need num >= 0 and den > 0");
        const std::int64_t prod = units.num * ticks_per_unit_;
        if (prod % units.den != 0)
            throw NonRepresentableError("duration " + std::to_string(units.num) + "/" +
                                        std::to_string(units.den) + " units is not a whole tick count");
        return TickDuration{prod / units.den};
    }

    /// Converts a decimal duration (e.g. parsed from a config file) to ticks.
    /// Accepts only values whose product with ticks_per_unit is an integer up
    /// to double rounding; anything else is rejected as non-representable.
    [[nodiscard]] TickDuration duration_from_double(double units) const {
        if (!(units >= 0.0) || !std::isfinite(units))
            throw NonRepresentableError("duration must be finite and non-negative");
        const double scaled = units * static_cast<double>(ticks_per_unit_);
        const double rounded = std::nearbyint(scaled);
        if (std::abs(scaled - rounded) > 1e-6 * std::max(1.0, std::abs(scaled)))
            throw NonRepresentableError("duration " + std::to_string(units) +
                                        " units is not a whole tick count at this scale");
        return TickDuration{static_cast<Ticks>(rounded)};
    }

    [[nodiscard]] double units(TickDuration d) const noexcept {
        return static_cast<double>(d.ticks()) / static_cast<double>(ticks_per_unit_);
    }
    [[nodiscard]] double units(TickTime t) const noexcept {
        return static_cast<double>(t.ticks()) / static_cast<double>(ticks_per_unit_);
    }

    /// Smallest whole number of units covering d: ceil(d / ticks_per_unit),
    /// in pure integer arithmetic.
    [[nodiscard]] std::int64_t ceil_div_units(TickDuration d) const noexcept {
        return (d.ticks() + ticks_per_unit_ - 1) / ticks_per_unit_;
    }
};

/// Builds a scale after checking that every required duration is an integer
/// tick count under it. Throws NonRepresentableError naming the first
/// duration that is not.
inline TickScale make_scale(Ticks ticks_per_unit, std::span<const Rational> required_durations) {
    TickScale scale{ticks_per_unit};
    for (const Rational& r : required_durations) (void)scale.duration(r);
    return scale;
}

/// Default scale: makes the benchmark parameters (c = 2, rates 0.2 / 0.45,
/// probe sizes down to 0.0001 units) exactly representable while keeping
/// million-unit horizons comfortably inside 64-bit tick arithmetic.
inline constexpr Ticks kDefaultTicksPerUnit = 10000;

}  // namespace schedleak
