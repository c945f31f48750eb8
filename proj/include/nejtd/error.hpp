#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nejtd {

/// A parameter violates its documented constraint. `field()` names the
/// offending field, `constraint()` the rule, e.g. "beta > 0".
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, std::string constraint)
        : std::invalid_argument("invalid " + field + ": requires " + constraint),
          field_(std::move(field)),
          constraint_(std::move(constraint)) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string field_;
    std::string constraint_;
};

/// Malformed configuration text.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// The integrator produced a non-finite state. Carries the trial seed so the
/// trajectory can be replayed.
class TrialFailure : public std::runtime_error {
public:
    TrialFailure(std::uint64_t trial_index, std::uint64_t seed, double tau)
        : std::runtime_error("trial " + std::to_string(trial_index) + " (seed " + std::to_string(seed) +
                             ") diverged at tau=" + std::to_string(tau) + "; reduce dt"),
          trial_index_(trial_index),
          seed_(seed) {}

    std::uint64_t trial_index() const noexcept { return trial_index_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t trial_index_;
    std::uint64_t seed_;
};

/// A TrialFailure inside one grid point of a campaign, tagged with that point.
class CampaignFailure : public std::runtime_error {
public:
    CampaignFailure(const std::string& point, const TrialFailure& cause)
        : std::runtime_error(point + ": " + cause.what()), point_(point), seed_(cause.seed()) {}

    const std::string& point() const noexcept { return point_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::string point_;
    std::uint64_t seed_;
};

/// Amplitude search bracket does not straddle the target.
class BracketError : public std::runtime_error {
public:
    BracketError(double lo, double hi, double auc_lo, double auc_hi, double target)
        : std::runtime_error("bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] does not straddle r_auc=" + std::to_string(target) + " (measured " +
                             std::to_string(auc_lo) + ", " + std::to_string(auc_hi) + ")"),
          auc_lo_(auc_lo),
          auc_hi_(auc_hi) {}

    double auc_lo() const noexcept { return auc_lo_; }
    double auc_hi() const noexcept { return auc_hi_; }

private:
    double auc_lo_;
    double auc_hi_;
};

}  // namespace nejtd
