#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rankq/dataset.hpp"
#include "rankq/estimation.hpp"
#include "rankq/qcompute.hpp"

namespace rankq {

// Exit statuses of the command-line front end. A Distinguishable verdict is a
// result, not a failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 2;

struct RunConfig {
    double epsilon = 0.1;
    double quantization_step = 0.01;
    std::uint64_t enumeration_cap = kDefaultEnumerationCap;
    double dp_bin_width = kDefaultDpBinWidth;
    EstimatorPolicy policy = EstimatorPolicy::ConfidenceWhenUnanimous;
    FilterPolicy filter = FilterPolicy::test();
    bool include_unscored_votes = false;
    // Replace theta = 1 by 1 - 1e-12 before computing Q.
    bool clamp_certain = false;
    std::optional<std::uint64_t> seed;
    bool json = false;
};

// Throws rankq::Error when a field is outside its documented range.
void validate(const RunConfig& config);

// Each command returns an exit status. Input problems are reported on `err`
// and give kExitInputError.

// annotations CSV -> targets CSV, plus a per-pair table and group summary.
int cmd_estimate(const std::string& annotations_path, const std::string& targets_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err);

// targets CSV + predictions CSV -> Q, method, tie mass and verdict.
int cmd_evaluate(const std::string& model_path, const std::string& predictions_path,
                 const RunConfig& config, std::ostream& out, std::ostream& err);

// Manifest CSV with header `method,attribute,model,predictions` (paths relative
// to the manifest) -> attributes x methods table of Q values.
int cmd_report(const std::string& manifest_path, const std::optional<std::string>& html_path,
               const RunConfig& config, std::ostream& out, std::ostream& err);

// JSON population spec -> annotations.csv, truth.csv and predictions_<name>.csv
// in `output_dir`.
int cmd_simulate(const std::string& spec_path, const std::string& output_dir,
                 const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace rankq
