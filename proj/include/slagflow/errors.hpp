#ifndef SLAGFLOW_ERRORS_HPP
#define SLAGFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace slagflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two cached roots closer than sep_tol; the geometry assumes simple zeros.
struct DegenerateRoots : Error {
    using Error::Error;
};

// Arg jump >= pi/2 between consecutive samples during branch continuation.
struct BranchStep : Error {
    using Error::Error;
};

// Phase lift increments exceed resolution; curve is under-resolved.
struct LiftFailure : Error {
    using Error::Error;
};

struct TooFewPoints : Error {
    using Error::Error;
};

// Interior point closer than eps_root to a root; run detect_and_split first.
struct NearRoot : Error {
    using Error::Error;
};

// Post-step monotonicity violated beyond mp_tol; caller halves dt and retries.
struct StepRejected : Error {
    using Error::Error;
};

struct SplitFailed : Error {
    using Error::Error;
};

struct ShootStalled : Error {
    using Error::Error;
};

// (sum alpha_i - theta1)/pi fails to be an integer within idx_tol.
struct NotIntegral : Error {
    using Error::Error;
};

struct WeightUndefined : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct NonTerminating : Error {
    using Error::Error;
};

}  // namespace slagflow

#endif
