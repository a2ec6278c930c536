#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "core/collapse.hpp"
#include "core/common.hpp"
#include "core/forecast.hpp"
#include "core/io.hpp"
#include "core/parallel.hpp"

namespace epf
{

namespace
{

namespace fs = std::filesystem;

std::string resolve_path(const std::string& base_dir, const std::string& path)
{
    if (path.empty() || fs::path(path).is_absolute() || base_dir.empty())
        return path;
    return (fs::path(base_dir) / path).string();
}

void require_known_keys(const nlohmann::json& j, const std::string& context, const std::set<std::string>& allowed)
{
    require(j.is_object(), ErrorCode::Parse, context + ": expected an object");
    for (const auto& item : j.items())
        require(allowed.count(item.key()) != 0, ErrorCode::Parse, context + ": unknown field '" + item.key() + "'");
}

std::string artifact_path(const PipelineConfig& config, const std::string& name)
{
    return (fs::path(config.output_dir) / name).string();
}

void require_artifact(const std::string& path, const char* produced_by)
{
    require(fs::exists(path), ErrorCode::Io,
            path + " is missing; run the " + std::string(produced_by) + " step first");
}

std::string basis_stem(BasisMethod method, const std::string& family)
{
    return "basis_" + basis_method_name(method) + "_" + family;
}

std::vector<double> to_std(const Eigen::VectorXd& v)
{
    return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json errors_to_json(const ForecastErrors& e)
{
    return {{"l1", e.l1}, {"l2", e.l2}, {"linf", e.linf}};
}

} // namespace

PipelineConfig load_pipeline_config(const std::string& path, const PipelineOverrides& overrides)
{
    nlohmann::json doc = load_json_file(path);
    const std::string context = path;
    require_known_keys(doc, context,
                       {"population", "data", "truth", "output_dir", "train", "fit", "forecast", "jobs"});

    if (overrides.population > 0.0)
        doc["population"] = overrides.population;
    if (overrides.adjustment_factor > 0.0)
        doc["fit"]["adjustment_factor"] = overrides.adjustment_factor;
    if (overrides.smooth_window > 0)
        doc["fit"]["smooth_window"] = overrides.smooth_window;
    if (overrides.jobs > 0)
        doc["jobs"] = overrides.jobs;

    PipelineConfig config;
    config.effective = doc;
    config.config_dir = fs::path(path).parent_path().string();

    // The worker count cannot influence results, so it is excluded from the
    // hash that artifacts embed.
    nlohmann::json hashed = doc;
    hashed.erase("jobs");
    config.hash = json_hash(hashed);

    config.emit_plot_data = overrides.emit_plot_data;
    if (doc.contains("population"))
    {
        config.population = json_number(doc, "population", context);
        require(config.population > 0.0, ErrorCode::Parse, context + ": population must be positive");
    }
    if (doc.contains("data"))
        config.data_path = resolve_path(config.config_dir, json_string(doc, "data", context));
    if (doc.contains("truth"))
        config.truth_path = resolve_path(config.config_dir, json_string(doc, "truth", context));
    config.output_dir = resolve_path(config.config_dir, doc.value("output_dir", std::string("out")));
    config.jobs = doc.contains("jobs") ? static_cast<int>(json_integer(doc, "jobs", context)) : 1;
    require(config.jobs >= 1, ErrorCode::Parse, context + ": jobs must be at least 1");

    if (doc.contains("train"))
    {
        config.has_train = true;
        const nlohmann::json& t = doc["train"];
        const std::string tc = context + " train";
        require_known_keys(t, tc,
                           {"model", "scenarios", "seed", "grid_days", "parameter_boxes", "methods", "n_max",
                            "epsilon", "nmf_iterations", "nmf_seed"});
        config.model = model_from_name(json_string(t, "model", tc));
        config.scenarios = static_cast<int>(json_integer(t, "scenarios", tc));
        require(config.scenarios >= 1, ErrorCode::Parse, tc + ": scenario count must be positive");
        config.seed = t.contains("seed") ? json_integer(t, "seed", tc) : 42;
        config.grid_days = t.contains("grid_days") ? static_cast<int>(json_integer(t, "grid_days", tc)) : 60;
        require(config.grid_days >= 2, ErrorCode::Parse, tc + ": grid_days must be at least 2");
        config.boxes_path =
            resolve_path(config.config_dir, t.value("parameter_boxes", std::string("data/parameter_boxes.json")));
        if (t.contains("methods"))
        {
            const nlohmann::json& methods = t["methods"];
            require(methods.is_array() && !methods.empty(), ErrorCode::Parse,
                    tc + ": methods must be a nonempty array");
            for (const auto& m : methods)
            {
                require(m.is_string(), ErrorCode::Parse, tc + ": methods must be strings");
                const BasisMethod parsed = basis_method_from_name(m.get<std::string>());
                require(std::find(config.methods.begin(), config.methods.end(), parsed) == config.methods.end(),
                        ErrorCode::Parse, tc + ": duplicate method");
                config.methods.push_back(parsed);
            }
        }
        else
        {
            config.methods = {BasisMethod::ENG};
        }
        config.n_max = t.contains("n_max") ? static_cast<int>(json_integer(t, "n_max", tc)) : 10;
        require(config.n_max >= 1, ErrorCode::Parse, tc + ": n_max must be positive");
        if (t.contains("epsilon"))
            config.epsilon = json_number(t, "epsilon", tc);
        require(config.epsilon > 0.0, ErrorCode::Parse, tc + ": epsilon must be positive");
        if (t.contains("nmf_iterations"))
            config.nmf_iterations = static_cast<int>(json_integer(t, "nmf_iterations", tc));
        require(config.nmf_iterations >= 1, ErrorCode::Parse, tc + ": nmf_iterations must be positive");
        if (t.contains("nmf_seed"))
            config.nmf_seed = json_integer(t, "nmf_seed", tc);
    }

    if (doc.contains("fit"))
    {
        config.has_fit = true;
        const nlohmann::json& f = doc["fit"];
        const std::string fc = context + " fit";
        require_known_keys(f, fc,
                           {"routine", "method", "window", "n_range", "adjustment_factor", "smooth_window",
                            "augment_exponential", "optimize_initial_state", "lookback"});
        if (f.contains("routine"))
            config.routine = fit_routine_from_name(json_string(f, "routine", fc));
        if (f.contains("method"))
            config.fit_method = basis_method_from_name(json_string(f, "method", fc));
        if (f.contains("window"))
        {
            const nlohmann::json& w = f["window"];
            require(w.is_array() && w.size() == 2 && w[0].is_number_integer() && w[1].is_number_integer(),
                    ErrorCode::Parse, fc + ": window must be [begin, end]");
            config.window_begin = w[0].get<int>();
            config.window_end = w[1].get<int>();
            require(config.window_begin >= 0, ErrorCode::Parse, fc + ": window begin must be nonnegative");
            require(config.window_end == -1 || config.window_end > config.window_begin, ErrorCode::Parse,
                    fc + ": window end must be -1 or greater than the begin");
        }
        const nlohmann::json n_range = f.value("n_range", nlohmann::json::array({5, 10}));
        require(n_range.is_array() && n_range.size() == 2 && n_range[0].is_number_integer() &&
                    n_range[1].is_number_integer(),
                ErrorCode::Parse, fc + ": n_range must be [lo, hi]");
        config.n_lo = n_range[0].get<int>();
        config.n_hi = n_range[1].get<int>();
        require(config.n_lo >= 1 && config.n_hi >= config.n_lo, ErrorCode::Parse, fc + ": n_range must be nonempty");
        if (f.contains("adjustment_factor"))
            config.adjustment_factor = json_number(f, "adjustment_factor", fc);
        require(config.adjustment_factor > 0.0, ErrorCode::Parse, fc + ": adjustment_factor must be positive");
        if (f.contains("smooth_window"))
            config.smooth_window = static_cast<int>(json_integer(f, "smooth_window", fc));
        require(config.smooth_window >= 1 && config.smooth_window % 2 == 1, ErrorCode::Parse,
                fc + ": smooth_window must be odd and positive");
        if (f.contains("augment_exponential"))
            config.augment_exp = json_boolean(f, "augment_exponential", fc);
        if (f.contains("optimize_initial_state"))
            config.optimize_init = json_boolean(f, "optimize_initial_state", fc);
        if (f.contains("lookback"))
            config.lookback = static_cast<int>(json_integer(f, "lookback", fc));
        require(config.lookback >= 1, ErrorCode::Parse, fc + ": lookback must be at least 1");
    }

    if (doc.contains("forecast"))
    {
        config.has_forecast = true;
        const nlohmann::json& fo = doc["forecast"];
        const std::string oc = context + " forecast";
        require_known_keys(fo, oc, {"horizon", "combine", "clamp_negative_rates"});
        if (fo.contains("horizon"))
            config.horizon = static_cast<int>(json_integer(fo, "horizon", oc));
        require(config.horizon >= 0, ErrorCode::Parse, oc + ": horizon must be nonnegative");
        const std::string combine = fo.value("combine", std::string("uniform"));
        require(combine == "uniform", ErrorCode::Parse, oc + ": only uniform combination is supported");
        if (fo.contains("clamp_negative_rates"))
            config.clamp_negative_rates = json_boolean(fo, "clamp_negative_rates", oc);
    }

    return config;
}

PreparedData prepare_series(const PipelineConfig& config)
{
    require(!config.data_path.empty(), ErrorCode::InvalidArgument, "config does not name an observed data file");
    require(config.population > 0.0, ErrorCode::InvalidArgument, "a positive population is required");

    PreparedData out;
    out.raw = load_csv(config.data_path, config.population);
    HealthSeries prepared = out.raw;
    if (config.adjustment_factor != 1.0)
        prepared = apply_adjustment(prepared, config.adjustment_factor);
    if (config.smooth_window > 1)
        prepared = smooth(prepared, config.smooth_window);
    prepared = enforce_monotone_removed(prepared);

    int first = 0;
    const int size = prepared.size();
    while (first < size && !(prepared.infected[static_cast<std::size_t>(first)] > 0.0))
        ++first;
    require(first < size, ErrorCode::Domain, config.data_path + ": series has no infected mass");
    if (first > 0)
    {
        prepared.dates.erase(prepared.dates.begin(), prepared.dates.begin() + first);
        prepared.infected.erase(prepared.infected.begin(), prepared.infected.begin() + first);
        prepared.removed.erase(prepared.removed.begin(), prepared.removed.begin() + first);
    }
    require(prepared.size() >= 2, ErrorCode::Domain, config.data_path + ": too few usable samples");
    out.prepared = std::move(prepared);
    out.trimmed_rows = first;
    return out;
}

namespace
{

/// Reconstructs the fit-ready basis for one family at dimension n: SVD keeps
/// the leading modes, ENG re-runs cone enlargement on the greedy prefix (the
/// enlargement is not nested across n), and NMF refactorizes the stored
/// scenario set at rank n.
ReducedBasis build_family_basis(const PipelineConfig& config, const std::string& family, int n)
{
    if (config.fit_method == BasisMethod::NMF)
    {
        const std::string manifest = artifact_path(config, "scenarios.json");
        require_artifact(manifest, "train");
        const ScenarioSet set = read_scenario_set(manifest);
        const Eigen::MatrixXd matrix = to_matrix(family == "beta" ? set.betas : set.gammas);
        const std::uint64_t seed = config.nmf_seed + (family == "gamma" ? 1 : 0);
        return nmf_basis(matrix, set.grid, n, config.nmf_iterations, seed);
    }

    const std::string manifest = artifact_path(config, basis_stem(config.fit_method, family) + ".json");
    require_artifact(manifest, "train");
    ReducedBasis basis = read_basis(manifest);
    require(n <= basis.n_modes(), ErrorCode::InvalidArgument,
            manifest + " stores only " + std::to_string(basis.n_modes()) + " modes; requested n=" +
                std::to_string(n));
    if (basis.method == BasisMethod::SVD)
    {
        basis.modes = Eigen::MatrixXd(basis.modes.topRows(n));
        return basis;
    }
    basis.raw_modes = Eigen::MatrixXd(basis.raw_modes.topRows(n));
    basis.modes = basis.raw_modes;
    basis.selected_rows.resize(static_cast<std::size_t>(n));
    basis.greedy_residuals.resize(static_cast<std::size_t>(n));
    enlarge_cone(basis, config.epsilon);
    return basis;
}

struct MemberBases
{
    ReducedBasis beta;
    ReducedBasis gamma;
};

MemberBases build_member_bases(const PipelineConfig& config, int n, const ObservedRates& rates, int window_end,
                               bool augment)
{
    MemberBases b;
    b.beta = build_family_basis(config, "beta", n);
    b.gamma = build_family_basis(config, "gamma", n);
    if (augment)
    {
        b.beta = augment_exponential(b.beta, rates.beta_star, window_end);
        b.gamma = augment_exponential(b.gamma, rates.gamma_star, window_end);
    }
    return b;
}

std::string basis_reference(const PipelineConfig& config)
{
    if (config.fit_method == BasisMethod::NMF)
        return "scenarios.json";
    return basis_stem(config.fit_method, "beta") + ".json";
}

} // namespace

void cmd_train(const PipelineConfig& config)
{
    require(config.has_train, ErrorCode::InvalidArgument, "config has no train section");
    const ParameterBox box = load_parameter_box(config.boxes_path, config.model);
    const TimeGrid grid = TimeGrid::daily(0.0, static_cast<std::size_t>(config.grid_days));
    const std::vector<DetailedParams> params = sample_parameters(box, config.scenarios, config.seed);
    const ScenarioSet set = build_training_set(params, grid, config.jobs);
    write_scenario_set(config.output_dir, set, config.model, parameter_box_hash(box), config.seed, config.scenarios,
                       config.hash);

    const Eigen::MatrixXd betas = to_matrix(set.betas);
    const Eigen::MatrixXd gammas = to_matrix(set.gammas);
    for (BasisMethod method : config.methods)
    {
        for (const std::string family : {"beta", "gamma"})
        {
            const Eigen::MatrixXd& matrix = family == std::string("beta") ? betas : gammas;
            require(config.n_max <= matrix.rows(), ErrorCode::InvalidArgument,
                    "n_max exceeds the number of surviving scenarios");
            ReducedBasis basis;
            std::uint64_t seed = 0;
            switch (method)
            {
            case BasisMethod::SVD:
                basis = svd_basis(matrix, grid, config.n_max);
                break;
            case BasisMethod::NMF:
                seed = config.nmf_seed + (family == std::string("gamma") ? 1 : 0);
                basis = nmf_basis(matrix, grid, config.n_max, config.nmf_iterations, seed);
                break;
            case BasisMethod::ENG:
                basis = greedy_select(matrix, grid, config.n_max);
                break;
            }
            write_basis(config.output_dir, basis_stem(method, family), basis, family, config.epsilon, seed,
                        config.hash);
        }
    }
}

void cmd_fit(const PipelineConfig& config)
{
    require(config.has_fit, ErrorCode::InvalidArgument, "config has no fit section");
    const PreparedData prep = prepare_series(config);
    const ObservedRates rates = observed_rates(prep.prepared);
    const int size = prep.prepared.size();
    const int w0 = config.window_begin;
    const int w1 = config.window_end < 0 ? size - 1 : config.window_end;
    require(w1 < size, ErrorCode::InvalidArgument, "fit window extends past the prepared series");

    const std::string reference = basis_reference(config);
    const std::string reference_path = artifact_path(config, reference);

    const int count = config.n_hi - config.n_lo + 1;
    std::vector<FitArtifact> artifacts(static_cast<std::size_t>(count));
    parallel_for(count, config.jobs, [&](int idx) {
        const int n = config.n_lo + idx;
        const MemberBases bases = build_member_bases(config, n, rates, w1, config.augment_exp);
        FitOptions options;
        options.routine = config.routine;
        options.window_begin = w0;
        options.window_end = w1;
        const FitResult fr = fit_rates(prep.prepared, rates, bases.beta, bases.gamma, options);

        FitArtifact art;
        art.n = n;
        art.routine = fit_routine_name(config.routine);
        art.method = basis_method_name(config.fit_method);
        art.window_begin = w0;
        art.window_end = w1;
        art.beta_coefficients = to_std(fr.beta_coefficients);
        art.gamma_coefficients = to_std(fr.gamma_coefficients);
        art.loss = fr.loss;
        art.loss_bg = fr.loss_bg;
        art.loss_ir = fr.loss_ir;
        if (config.optimize_init)
        {
            const RateFunction beta_fit = basis_combination(bases.beta, fr.beta_coefficients);
            const RateFunction gamma_fit = basis_combination(bases.gamma, fr.gamma_coefficients);
            const InitialState init =
                optimize_initial_state(prep.prepared, beta_fit, gamma_fit, w1, config.lookback);
            art.initial_index = w1 - config.lookback;
            art.initial_i = init.i;
            art.initial_r = init.r;
            art.initial_optimized = true;
        }
        else
        {
            art.initial_index = w1;
            art.initial_i = prep.prepared.infected[static_cast<std::size_t>(w1)];
            art.initial_r = prep.prepared.removed[static_cast<std::size_t>(w1)];
            art.initial_optimized = false;
        }
        if (config.augment_exp)
        {
            art.augmented = true;
            art.exp_beta_xi = bases.beta.exp_xi;
            art.exp_beta_xi_prime = bases.beta.exp_xi_prime;
            art.exp_beta_reversed = bases.beta.exp_reversed;
            art.exp_gamma_xi = bases.gamma.exp_xi;
            art.exp_gamma_xi_prime = bases.gamma.exp_xi_prime;
            art.exp_gamma_reversed = bases.gamma.exp_reversed;
        }
        artifacts[static_cast<std::size_t>(idx)] = art;
    });

    const std::string reference_hash = hash_file(reference_path);
    nlohmann::json files = nlohmann::json::object();
    std::vector<int> members;
    for (const FitArtifact& art : artifacts)
    {
        const std::string name =
            "fit_" + basis_method_name(config.fit_method) + "_n" + std::to_string(art.n) + ".json";
        write_fit_artifact(artifact_path(config, name), art, reference, reference_hash, config.hash);
        files["n" + std::to_string(art.n)] = name;
        members.push_back(art.n);
    }

    const nlohmann::json summary = {{"artifact", "fit-summary"},
                                    {"method", basis_method_name(config.fit_method)},
                                    {"routine", fit_routine_name(config.routine)},
                                    {"window", {w0, w1}},
                                    {"members", members},
                                    {"trimmed_rows", prep.trimmed_rows},
                                    {"augment_exponential", config.augment_exp},
                                    {"optimize_initial_state", config.optimize_init},
                                    {"files", files},
                                    {"config_hash", config.hash}};
    write_json_file(artifact_path(config, "fit.json"), summary);

    if (config.emit_plot_data)
        cmd_plot_data(config);
}

namespace
{

Forecast member_forecast(const PipelineConfig& config, const FitArtifact& art, const MemberBases& bases,
                         double population, int w1, int horizon)
{
    const Eigen::Map<const Eigen::VectorXd> cb(art.beta_coefficients.data(),
                                               static_cast<Eigen::Index>(art.beta_coefficients.size()));
    const Eigen::Map<const Eigen::VectorXd> cg(art.gamma_coefficients.data(),
                                               static_cast<Eigen::Index>(art.gamma_coefficients.size()));
    require(cb.size() == bases.beta.n_modes() && cg.size() == bases.gamma.n_modes(), ErrorCode::Parse,
            "fit artifact coefficients do not match the rebuilt basis; re-run the fit step");
    const RateFunction beta_fit = basis_combination(bases.beta, cb);
    const RateFunction gamma_fit = basis_combination(bases.gamma, cg);

    ForecastOptions options;
    options.clamp_negative_rates = config.clamp_negative_rates;
    const int lead = w1 - art.initial_index;
    Forecast f = propagate_forecast(beta_fit, gamma_fit, population, art.initial_i, art.initial_r,
                                    static_cast<double>(art.initial_index), lead + horizon, options);
    if (lead > 0 && f.size() > 0)
    {
        // Drop the run-up from the optimized anchor so the forecast window
        // starts at the end of the fit window.
        f.i_pred.erase(f.i_pred.begin(), f.i_pred.begin() + lead);
        f.r_pred.erase(f.r_pred.begin(), f.r_pred.begin() + lead);
        f.t_start = w1;
    }
    return f;
}

} // namespace

void cmd_forecast(const PipelineConfig& config)
{
    require(config.has_forecast, ErrorCode::InvalidArgument, "config has no forecast section");
    const PreparedData prep = prepare_series(config);
    const ObservedRates rates = observed_rates(prep.prepared);

    const std::string summary_path = artifact_path(config, "fit.json");
    require_artifact(summary_path, "fit");
    const nlohmann::json summary = load_json_file(summary_path);
    require(json_string(summary, "artifact", summary_path) == "fit-summary", ErrorCode::Parse,
            summary_path + ": not a fit summary");
    const nlohmann::json& window = json_field(summary, "window", summary_path);
    const int w1 = window[1].get<int>();
    const std::vector<int> members = json_field(summary, "members", summary_path).get<std::vector<int>>();
    require(!members.empty(), ErrorCode::Parse, summary_path + ": no fit members");
    const nlohmann::json& files = json_field(summary, "files", summary_path);
    const bool augment = json_boolean(summary, "augment_exponential", summary_path);

    std::vector<Forecast> forecasts(members.size());
    std::vector<FitArtifact> artifacts(members.size());
    parallel_for(static_cast<int>(members.size()), config.jobs, [&](int idx) {
        const int n = members[static_cast<std::size_t>(idx)];
        const std::string file = json_string(files, "n" + std::to_string(n), summary_path);
        artifacts[static_cast<std::size_t>(idx)] = read_fit_artifact(artifact_path(config, file));
        const MemberBases bases = build_member_bases(config, n, rates, w1, augment);
        forecasts[static_cast<std::size_t>(idx)] =
            member_forecast(config, artifacts[static_cast<std::size_t>(idx)], bases, config.population, w1,
                            config.horizon);
    });

    const Date start = prep.prepared.dates.front();
    nlohmann::json member_list = nlohmann::json::array();
    for (std::size_t idx = 0; idx < members.size(); ++idx)
    {
        const std::string name = "forecast_n" + std::to_string(members[idx]) + ".csv";
        write_forecast_csv(artifact_path(config, name), forecasts[idx], start);
        member_list.push_back({{"n", members[idx]},
                               {"file", name},
                               {"negative_rate_points", forecasts[idx].negative_rate_points}});
    }
    const Forecast combined = combine_forecasts(forecasts);
    write_forecast_csv(artifact_path(config, "forecast.csv"), combined, start);

    const nlohmann::json meta = {{"artifact", "forecast"},
                                 {"method", json_string(summary, "method", summary_path)},
                                 {"horizon", config.horizon},
                                 {"window", window},
                                 {"anchor_date", prep.prepared.dates[static_cast<std::size_t>(w1)].to_string()},
                                 {"members", member_list},
                                 {"combined", "forecast.csv"},
                                 {"negative_rate_points", combined.negative_rate_points},
                                 {"config_hash", config.hash}};
    write_json_file(artifact_path(config, "forecast.json"), meta);

    if (config.emit_plot_data)
        cmd_plot_data(config);
}

namespace
{

nlohmann::json forecast_error_entry(const Forecast& f, const HealthSeries& truth, Date series_start)
{
    const int offset = (series_start - truth.dates.front()) + static_cast<int>(std::lround(f.t_start));
    require(offset >= 0 && offset + static_cast<int>(f.size()) <= truth.size(), ErrorCode::InvalidArgument,
            "forecast window is not covered by the truth series");
    const auto i_begin = truth.infected.begin() + offset;
    const auto r_begin = truth.removed.begin() + offset;
    const std::vector<double> i_truth(i_begin, i_begin + static_cast<long>(f.size()));
    const std::vector<double> r_truth(r_begin, r_begin + static_cast<long>(f.size()));
    return {{"infected", errors_to_json(forecast_errors(f.i_pred, i_truth))},
            {"removed", errors_to_json(forecast_errors(f.r_pred, r_truth))}};
}

} // namespace

void cmd_evaluate(const PipelineConfig& config)
{
    require(!config.truth_path.empty(), ErrorCode::InvalidArgument, "config does not name a truth series");
    const HealthSeries truth = load_csv(config.truth_path, config.population);
    const PreparedData prep = prepare_series(config);

    const std::string meta_path = artifact_path(config, "forecast.json");
    require_artifact(meta_path, "forecast");
    const nlohmann::json meta = load_json_file(meta_path);
    require(json_string(meta, "artifact", meta_path) == "forecast", ErrorCode::Parse,
            meta_path + ": not a forecast manifest");
    const int horizon = static_cast<int>(json_integer(meta, "horizon", meta_path));
    require(horizon >= 1, ErrorCode::InvalidArgument, "nothing to evaluate for a zero horizon");
    const int w1 = json_field(meta, "window", meta_path)[1].get<int>();

    const Date start = prep.prepared.dates.front();
    nlohmann::json member_list = nlohmann::json::array();
    for (const auto& entry : json_field(meta, "members", meta_path))
    {
        const std::string file = json_string(entry, "file", meta_path);
        const Forecast f = read_forecast_csv(artifact_path(config, file), start);
        nlohmann::json e = forecast_error_entry(f, truth, start);
        e["n"] = json_integer(entry, "n", meta_path);
        member_list.push_back(std::move(e));
    }

    const Forecast combined = read_forecast_csv(artifact_path(config, json_string(meta, "combined", meta_path)),
                                                start);
    const ObservedRates rates = observed_rates(prep.prepared);
    const Forecast baseline = baseline_forecast(prep.prepared, rates, w1, horizon);

    const nlohmann::json report = {{"artifact", "evaluation"},
                                   {"horizon", horizon},
                                   {"combined", forecast_error_entry(combined, truth, start)},
                                   {"members", member_list},
                                   {"baseline", forecast_error_entry(baseline, truth, start)},
                                   {"config_hash", config.hash}};
    write_json_file(artifact_path(config, "evaluation.json"), report);
}

void cmd_plot_data(const PipelineConfig& config)
{
    const PreparedData prep = prepare_series(config);
    const ObservedRates rates = observed_rates(prep.prepared);
    const std::string plot_dir = (fs::path(config.output_dir) / "plot").string();
    fs::create_directories(plot_dir);

    std::string observed = "date,I_raw,R_raw,I_prepared,R_prepared\n";
    for (int k = 0; k < prep.prepared.size(); ++k)
    {
        const int raw_k = k + prep.trimmed_rows;
        observed += prep.prepared.dates[static_cast<std::size_t>(k)].to_string();
        observed += ',';
        observed += format_double(prep.raw.infected[static_cast<std::size_t>(raw_k)]);
        observed += ',';
        observed += format_double(prep.raw.removed[static_cast<std::size_t>(raw_k)]);
        observed += ',';
        observed += format_double(prep.prepared.infected[static_cast<std::size_t>(k)]);
        observed += ',';
        observed += format_double(prep.prepared.removed[static_cast<std::size_t>(k)]);
        observed += '\n';
    }
    write_text_file((fs::path(plot_dir) / "observed.csv").string(), observed);

    std::string rates_csv = "t,beta_star,gamma_star,r0\n";
    for (int k = 0; k < static_cast<int>(rates.grid.count); ++k)
    {
        rates_csv += format_double(rates.grid.time(k));
        rates_csv += ',';
        rates_csv += format_double(rates.beta_star.values[static_cast<std::size_t>(k)]);
        rates_csv += ',';
        rates_csv += format_double(rates.gamma_star.values[static_cast<std::size_t>(k)]);
        rates_csv += ',';
        rates_csv += format_double(rates.r0[static_cast<std::size_t>(k)]);
        rates_csv += '\n';
    }
    write_text_file((fs::path(plot_dir) / "rates.csv").string(), rates_csv);

    const std::string summary_path = artifact_path(config, "fit.json");
    if (!fs::exists(summary_path))
        return;
    const nlohmann::json summary = load_json_file(summary_path);
    const std::vector<int> members = json_field(summary, "members", summary_path).get<std::vector<int>>();
    const nlohmann::json& files = json_field(summary, "files", summary_path);
    const int w1 = json_field(summary, "window", summary_path)[1].get<int>();
    const bool augment = json_boolean(summary, "augment_exponential", summary_path);
    for (int n : members)
    {
        const FitArtifact art =
            read_fit_artifact(artifact_path(config, json_string(files, "n" + std::to_string(n), summary_path)));
        const MemberBases bases = build_member_bases(config, n, rates, w1, augment);
        const Eigen::Map<const Eigen::VectorXd> cb(art.beta_coefficients.data(),
                                                   static_cast<Eigen::Index>(art.beta_coefficients.size()));
        const Eigen::Map<const Eigen::VectorXd> cg(art.gamma_coefficients.data(),
                                                   static_cast<Eigen::Index>(art.gamma_coefficients.size()));
        const RateFunction beta_fit = basis_combination(bases.beta, cb);
        const RateFunction gamma_fit = basis_combination(bases.gamma, cg);
        std::string csv = "t,beta_fit,gamma_fit\n";
        for (int k = 0; k < static_cast<int>(beta_fit.grid.count); ++k)
        {
            csv += format_double(beta_fit.grid.time(k));
            csv += ',';
            csv += format_double(beta_fit.values[static_cast<std::size_t>(k)]);
            csv += ',';
            csv += format_double(gamma_fit.values[static_cast<std::size_t>(k)]);
            csv += '\n';
        }
        write_text_file((fs::path(plot_dir) / ("fit_rates_n" + std::to_string(n) + ".csv")).string(), csv);
    }
}

void run_pipeline_command(const std::string& command, const PipelineConfig& config)
{
    if (command == "train")
        cmd_train(config);
    else if (command == "fit")
        cmd_fit(config);
    else if (command == "forecast")
        cmd_forecast(config);
    else if (command == "evaluate")
        cmd_evaluate(config);
    else if (command == "plot-data")
        cmd_plot_data(config);
    else
        fail(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

} // namespace epf
