#pragma once

#include <stdexcept>
#include <string>

namespace schedleak {

/// Base class for all schedleak errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A configured duration does not land on the tick grid.
struct NonRepresentableError : Error {
    using Error::Error;
};

/// Subtracting a later time from an earlier one, or similar order violations.
struct TimeOrderError : Error {
    using Error::Error;
};

/// Invalid policy or experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// A closed-form formula was evaluated outside its stability region.
struct UnstableError : Error {
    using Error::Error;
};

/// Genie estimator alignment conditions violated (period not a multiple of
/// the clock period, or grids not aligned at time zero).
struct AlignmentError : Error {
    using Error::Error;
};

/// Probe observations inconsistent with the assumed policy/probe pattern
/// (negative reconstructed count, non-periodic probes, ...).
struct ObservationError : Error {
    using Error::Error;
};

/// Requested binning extends past the generated horizon.
struct HorizonError : Error {
    using Error::Error;
};

/// Not enough data for the requested statistic (TooFewPeriods, NoJobs,
/// Misaligned, replications < 2).
struct StatsError : Error {
    using Error::Error;
};

}  // namespace schedleak
