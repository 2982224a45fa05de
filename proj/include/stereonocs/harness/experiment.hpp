#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stereonocs/harness/config.hpp"
#include "stereonocs/metrics.hpp"

namespace stereonocs::harness {

/// Mixes a 64-bit state with a stream index (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t state, std::uint64_t index);

/// Seed of trial `index` of a category; independent of every other trial.
std::uint64_t trial_seed(std::uint64_t master, Category c, std::size_t index);

/// Default evaluation symmetry: bottles and cups are treated as symmetric
/// about the NOCS up axis, mugs as asymmetric.
SymmetrySpec default_symmetry(Category c);

struct TrialRecord {
    std::size_t trial_id = 0;
    std::uint64_t seed = 0;
    Category category = Category::bottle;
    Method method = Method::decoupled;
    std::size_t level = 0;
    NoiseModel noise;
    double s_true = 0.0;
    std::optional<Pose> estimate;
    double s_est = 0.0;
    double rot_err_deg = 0.0;       // default symmetry of the category
    double rot_err_axial_deg = 0.0; // always symmetric about the up axis
    double trans_err_m = 0.0;
    double iou = 0.0;
    double runtime_ms = 0.0;
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
    TrialErrors errors(bool axial = false) const;
};

struct SummaryRow {
    Category category;
    Method method;
    std::string symmetry;  // "none" or "axial"
    std::size_t level;
    NoiseModel noise;
    EvalReport report;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;  // ordered by category, trial, level, method
    std::vector<SummaryRow> summary;
};

/// One estimate with the given method on (possibly corrupted) maps.
Pose estimate_with(Method m, const StereoMaps& maps, const StereoRig& rig, const DecoupledConfig& solver,
                   std::uint64_t seed);

/// sample -> render -> corrupt -> estimate -> score, for every category,
/// trial, noise level and method. Failed trials are recorded with the error
/// code as status. Output order and content do not depend on cfg.jobs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, const ExperimentConfig& cfg);

inline constexpr const char* kTrialCsvHeader =
    "trial_id,seed,category,method,noise_sigma,dropout,s_true,s_est,rot_err_deg,trans_err_m,iou3d,runtime_ms,status";

void write_trials_csv(const std::vector<TrialRecord>& records, std::ostream& out);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
/// Standalone SVG of 10deg5cm mAP against noise sigma, one curve per category/method.
void write_summary_svg(const std::vector<SummaryRow>& rows, std::ostream& out);

/// Writes trials.csv, summary.csv, summary.svg and config.ini into cfg.out_dir.
void write_experiment_outputs(const ExperimentResult& result, const ExperimentConfig& cfg);

/// One parsed CSV row, enough to recompute the reports.
struct CsvTrial {
    std::string category;
    std::string method;
    double noise_sigma;
    double dropout;
    TrialErrors errors;
};
/// Throws InvalidConfig on a bad header or row.
std::vector<CsvTrial> read_trials_csv(std::istream& in);

struct CsvGroupReport {
    std::string category, method;
    double noise_sigma, dropout;
    EvalReport report;
};
/// Groups rows by (category, method, sigma, dropout) in first-seen order.
std::vector<CsvGroupReport> evaluate_trials(const std::vector<CsvTrial>& rows);

}  // namespace stereonocs::harness
