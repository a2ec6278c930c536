#ifndef EPF_CORE_IO_HPP
#define EPF_CORE_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/forecast.hpp"
#include "core/multiregion.hpp"
#include "core/reduction.hpp"
#include "core/scenarios.hpp"
#include "core/series.hpp"

namespace epf
{

/// FNV-1a 64-bit content hash; hex form is what manifests embed.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t hash);
std::string hash_file(const std::string& path);

/// Canonical JSON text: sorted keys, no whitespace, shortest round-trip
/// numbers. Equal documents hash equal regardless of input formatting.
std::string canonical_json(const nlohmann::json& j);
std::string json_hash(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// Field accessors that name the offending document section on failure.
const nlohmann::json& json_field(const nlohmann::json& j, const std::string& key, const std::string& context);
double json_number(const nlohmann::json& j, const std::string& key, const std::string& context);
std::int64_t json_integer(const nlohmann::json& j, const std::string& key, const std::string& context);
std::string json_string(const nlohmann::json& j, const std::string& key, const std::string& context);
bool json_boolean(const nlohmann::json& j, const std::string& key, const std::string& context);

/// Fixed shortest-round-trip formatting shared by every CSV writer, so
/// rewriting an artifact from equal numbers is byte-identical.
std::string format_double(double value);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

void write_series_csv(const std::string& path, const HealthSeries& series);

// --- parameter boxes ---------------------------------------------------

/// Reads the versioned default-box file and returns the entry for `model`;
/// every model parameter must be present with a [lo, hi] pair.
ParameterBox load_parameter_box(const std::string& path, DetailedModel model);

nlohmann::json parameter_box_to_json(const ParameterBox& box);
std::string parameter_box_hash(const ParameterBox& box);

// --- scenario sets ------------------------------------------------------

struct ScenarioArtifactInfo
{
    std::string manifest_path;
    std::string box_hash;
    std::uint64_t seed = 0;
    int requested = 0;
};

/// Writes betas/gammas CSVs plus `scenarios.json` under `directory`. The
/// manifest records grid, seed, box hash and content hashes of the CSVs.
void write_scenario_set(const std::string& directory, const ScenarioSet& set, DetailedModel model,
                        const std::string& box_hash, std::uint64_t seed, int requested,
                        const std::string& config_hash);

ScenarioSet read_scenario_set(const std::string& manifest_path);

// --- bases ---------------------------------------------------------------

/// Writes the basis modes CSV plus a manifest. ENG bases persist the raw
/// greedy rows (cone enlargement is re-run per prefix at fit time); SVD and
/// NMF persist the modes themselves. SVD manifests carry the full eigenvalue
/// list and the tail sum at the stored dimension.
void write_basis(const std::string& directory, const std::string& stem, const ReducedBasis& basis,
                 const std::string& family, double epsilon, std::uint64_t seed, const std::string& config_hash);

ReducedBasis read_basis(const std::string& manifest_path);

// --- fits and forecasts --------------------------------------------------

struct FitArtifact
{
    int n = 0;
    std::string routine;
    std::string method;
    int window_begin = 0;
    int window_end = 0;
    std::vector<double> beta_coefficients;
    std::vector<double> gamma_coefficients;
    double loss = 0.0;
    double loss_bg = 0.0;
    double loss_ir = 0.0;
    double initial_i = 0.0;
    double initial_r = 0.0;
    int initial_index = 0;
    bool initial_optimized = false;
    bool augmented = false;
    double exp_beta_xi = 0.0;
    double exp_beta_xi_prime = 0.0;
    bool exp_beta_reversed = false;
    double exp_gamma_xi = 0.0;
    double exp_gamma_xi_prime = 0.0;
    bool exp_gamma_reversed = false;
};

void write_fit_artifact(const std::string& path, const FitArtifact& fit, const std::string& basis_manifest,
                        const std::string& basis_hash, const std::string& config_hash);
FitArtifact read_fit_artifact(const std::string& path);

/// Forecast CSV rows are `date,I_pred,R_pred`, dated relative to the series
/// start.
void write_forecast_csv(const std::string& path, const Forecast& forecast, Date series_start);
Forecast read_forecast_csv(const std::string& path, Date series_start);

// --- mobility ------------------------------------------------------------

/// CSV `t,i,j,lambda` with 0-based region indices: rates from i to j over a
/// uniform time grid. Missing pairs default to zero; rates must be
/// nonnegative.
MobilityField load_mobility_eulerian(const std::string& path);

/// CSV `t,i,j,k,lambda`: presence fractions of residents of i moving j -> k.
/// Each (t, i, j) group must be a probability row (entries in [0, 1] summing
/// to 1 within 1e-6).
struct LagrangianMobility
{
    TimeGrid grid;
    int regions = 0;
    // tensors[k] is indexed (home, from, to) flattened: home * P * P + from * P + to.
    std::vector<std::vector<double>> tensors;
};

LagrangianMobility load_mobility_lagrangian(const std::string& path);

/// Home-row reduction of the full tensor: presence(home, location) at each
/// time, the fractions consumed by the day-trip model.
MobilityField presence_from_lagrangian(const LagrangianMobility& mobility);

} // namespace epf

#endif // EPF_CORE_IO_HPP
