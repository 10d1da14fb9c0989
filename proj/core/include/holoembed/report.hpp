#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holoembed/complex2.hpp"

namespace holoembed {

/// One named check with its numeric margin (positive = healthy) and, for
/// failures, a witness point.
struct CheckResult {
    std::string name;
    bool pass = false;
    double margin = 0.0;
    std::size_t samples = 0;
    std::optional<Vec2c> witness;
    std::string note;
};

/// Structured pass/fail evidence; failing checks always carry a witness.
class VerificationReport {
  public:
    void add_pass(std::string name, double margin, std::size_t samples, std::string note = "");
    void add_fail(std::string name, double margin, std::size_t samples, Vec2c witness,
                  std::string note = "");
    void add(CheckResult check);

    /// Appends another report's checks under a stage prefix.
    void merge(const VerificationReport& other, const std::string& prefix = "");

    bool all_pass() const;
    const std::vector<CheckResult>& checks() const { return checks_; }
    const CheckResult* find(const std::string& name) const;

    /// Stable key order, deterministic float formatting (via the JSON dump).
    std::string to_json(int indent = -1) const;

  private:
    std::vector<CheckResult> checks_;
};

}  // namespace holoembed
