#ifndef EPF_CORE_PIPELINE_HPP
#define EPF_CORE_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/fitting.hpp"
#include "core/reduction.hpp"
#include "core/scenarios.hpp"

namespace epf
{

/// Command-line values that take precedence over the config file. Sentinel
/// values mean "keep whatever the config says".
struct PipelineOverrides
{
    double population = 0.0;        // > 0 overrides
    double adjustment_factor = 0.0; // > 0 overrides
    int smooth_window = 0;          // > 0 overrides
    int jobs = 0;                   // > 0 overrides
    bool emit_plot_data = false;
};

/// Parsed and validated run configuration. `hash` identifies the effective
/// settings (config file plus overrides) with the worker count excluded, so
/// runs that differ only in --jobs produce identical artifacts.
struct PipelineConfig
{
    nlohmann::json effective;
    std::string config_dir;
    std::string hash;

    double population = 0.0;
    std::string data_path;
    std::string truth_path;
    std::string output_dir;
    int jobs = 1;
    bool emit_plot_data = false;

    // train
    bool has_train = false;
    DetailedModel model = DetailedModel::SEI5CHRD;
    int scenarios = 0;
    std::uint64_t seed = 0;
    int grid_days = 0;
    std::string boxes_path;
    std::vector<BasisMethod> methods;
    int n_max = 0;
    double epsilon = 1e-3;
    int nmf_iterations = 500;
    std::uint64_t nmf_seed = 7;

    // fit
    bool has_fit = false;
    FitRoutine routine = FitRoutine::BG;
    BasisMethod fit_method = BasisMethod::ENG;
    int window_begin = 0;
    int window_end = -1;
    int n_lo = 0;
    int n_hi = 0;
    double adjustment_factor = 15.0;
    int smooth_window = 7;
    bool augment_exp = false;
    bool optimize_init = false;
    int lookback = 3;

    // forecast
    bool has_forecast = false;
    int horizon = 14;
    bool clamp_negative_rates = true;
};

PipelineConfig load_pipeline_config(const std::string& path, const PipelineOverrides& overrides = {});

/// Observed data after the standard preparation chain: adjustment, centered
/// moving-average smoothing, monotone repair of the removed counts, and
/// trimming of leading rows with no infected mass. Window indices in the
/// config refer to the prepared series.
struct PreparedData
{
    HealthSeries raw;
    HealthSeries prepared;
    int trimmed_rows = 0;
};

PreparedData prepare_series(const PipelineConfig& config);

void cmd_train(const PipelineConfig& config);
void cmd_fit(const PipelineConfig& config);
void cmd_forecast(const PipelineConfig& config);
void cmd_evaluate(const PipelineConfig& config);
void cmd_plot_data(const PipelineConfig& config);

/// Dispatches a subcommand name to its implementation; unknown names are a
/// validation error.
void run_pipeline_command(const std::string& command, const PipelineConfig& config);

} // namespace epf

#endif // EPF_CORE_PIPELINE_HPP
