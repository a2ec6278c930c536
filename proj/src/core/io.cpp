#include "core/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "core/common.hpp"

namespace epf
{

namespace
{

namespace fs = std::filesystem;

std::vector<std::string> split_csv_line(std::string line)
{
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    std::vector<std::string> fields;
    std::string current;
    for (char c : line)
    {
        if (c == ',')
        {
            fields.push_back(current);
            current.clear();
        }
        else
        {
            current += c;
        }
    }
    fields.push_back(current);
    return fields;
}

double parse_double(const std::string& text, const std::string& context)
{
    // from_chars, unlike stod, accepts subnormals, so every value emitted by
    // format_double reads back bit for bit.
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+')
        ++begin;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    require(ec == std::errc{} && ptr == end, ErrorCode::Parse, context + ": malformed number '" + text + "'");
    return v;
}

int parse_index(const std::string& text, const std::string& context)
{
    const double v = parse_double(text, context);
    const int i = static_cast<int>(std::lround(v));
    require(std::abs(v - i) <= 1e-9 && i >= 0, ErrorCode::Parse, context + ": expected a nonnegative integer");
    return i;
}

nlohmann::json grid_to_json(const TimeGrid& grid)
{
    return {{"t0", grid.t0}, {"step", grid.step}, {"count", grid.count}};
}

TimeGrid grid_from_json(const nlohmann::json& j, const std::string& context)
{
    return TimeGrid{json_number(j, "t0", context), json_number(j, "step", context),
                    static_cast<int>(json_integer(j, "count", context))};
}

std::string sibling_path(const std::string& manifest_path, const std::string& file)
{
    return (fs::path(manifest_path).parent_path() / file).string();
}

void verify_hash(const std::string& path, const std::string& expected, const std::string& what)
{
    require(hash_file(path) == expected, ErrorCode::Parse,
            what + " content hash mismatch: " + path + " does not match its manifest");
}

} // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size)
{
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i)
    {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    return fnv1a64(bytes.data(), bytes.size());
}

std::string hash_hex(std::uint64_t hash)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string hash_file(const std::string& path)
{
    return hash_hex(fnv1a64(read_text_file(path)));
}

std::string canonical_json(const nlohmann::json& j)
{
    // nlohmann's default object is key-sorted, so a compact dump is canonical.
    return j.dump();
}

std::string json_hash(const nlohmann::json& j)
{
    return hash_hex(fnv1a64(canonical_json(j)));
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    require(!in.bad(), ErrorCode::Io, "read failed for " + path);
    return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content)
{
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCode::Io, "cannot open " + path + " for writing");
    out << content;
    out.flush();
    require(out.good(), ErrorCode::Io, "write failed for " + path);
}

nlohmann::json load_json_file(const std::string& path)
{
    const std::string text = read_text_file(path);
    try
    {
        return nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception& e)
    {
        fail(ErrorCode::Parse, path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j)
{
    write_text_file(path, j.dump(2) + "\n");
}

const nlohmann::json& json_field(const nlohmann::json& j, const std::string& key, const std::string& context)
{
    require(j.is_object(), ErrorCode::Parse, context + ": expected an object");
    const auto it = j.find(key);
    require(it != j.end(), ErrorCode::Parse, context + ": missing field '" + key + "'");
    return *it;
}

double json_number(const nlohmann::json& j, const std::string& key, const std::string& context)
{
    const nlohmann::json& v = json_field(j, key, context);
    require(v.is_number(), ErrorCode::Parse, context + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::int64_t json_integer(const nlohmann::json& j, const std::string& key, const std::string& context)
{
    const nlohmann::json& v = json_field(j, key, context);
    require(v.is_number_integer(), ErrorCode::Parse, context + ": field '" + key + "' must be an integer");
    return v.get<std::int64_t>();
}

std::string json_string(const nlohmann::json& j, const std::string& key, const std::string& context)
{
    const nlohmann::json& v = json_field(j, key, context);
    require(v.is_string(), ErrorCode::Parse, context + ": field '" + key + "' must be a string");
    return v.get<std::string>();
}

bool json_boolean(const nlohmann::json& j, const std::string& key, const std::string& context)
{
    const nlohmann::json& v = json_field(j, key, context);
    require(v.is_boolean(), ErrorCode::Parse, context + ": field '" + key + "' must be a boolean");
    return v.get<bool>();
}

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& matrix)
{
    std::string out;
    for (Eigen::Index r = 0; r < matrix.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < matrix.cols(); ++c)
        {
            if (c > 0)
                out += ',';
            out += format_double(matrix(r, c));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

Eigen::MatrixXd read_matrix_csv(const std::string& path)
{
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const std::vector<std::string> fields = split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& f : fields)
            row.push_back(parse_double(f, path + " line " + std::to_string(line_no)));
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), ErrorCode::Parse, path + ": empty matrix");
    return to_matrix(rows);
}

void write_series_csv(const std::string& path, const HealthSeries& series)
{
    std::string out = "date,infected,removed\n";
    for (int k = 0; k < series.size(); ++k)
    {
        out += series.dates[static_cast<std::size_t>(k)].to_string();
        out += ',';
        out += format_double(series.infected[static_cast<std::size_t>(k)]);
        out += ',';
        out += format_double(series.removed[static_cast<std::size_t>(k)]);
        out += '\n';
    }
    write_text_file(path, out);
}

ParameterBox load_parameter_box(const std::string& path, DetailedModel model)
{
    const nlohmann::json doc = load_json_file(path);
    const std::string context = path;
    require(json_integer(doc, "version", context) == 1, ErrorCode::Parse, context + ": unsupported box version");
    const nlohmann::json& boxes = json_field(doc, "boxes", context);
    const std::string tag = model_name(model);
    const auto it = boxes.find(tag);
    require(it != boxes.end(), ErrorCode::Parse, context + ": no parameter box for model '" + tag + "'");
    const nlohmann::json& entry = *it;
    const std::string box_context = context + " boxes." + tag;

    const auto read_pair = [&](const nlohmann::json& v, const std::string& what) {
        require(v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number(), ErrorCode::Parse,
                box_context + ": " + what + " must be a [lo, hi] pair");
        return std::pair<double, double>{v[0].get<double>(), v[1].get<double>()};
    };

    ParameterBox box;
    box.model = model;
    box.population = json_number(entry, "population", box_context);
    box.e0_bounds = read_pair(json_field(entry, "e0", box_context), "e0");
    box.i0_bounds = read_pair(json_field(entry, "i0", box_context), "i0");
    const nlohmann::json& params = json_field(entry, "parameters", box_context);
    const std::vector<std::string>& names = param_names(model);
    require(params.is_object() && params.size() == names.size(), ErrorCode::Parse,
            box_context + ": expected exactly " + std::to_string(names.size()) + " parameter ranges");
    box.bounds.reserve(names.size());
    for (const std::string& name : names)
    {
        const auto pit = params.find(name);
        require(pit != params.end(), ErrorCode::Parse, box_context + ": missing parameter '" + name + "'");
        box.bounds.push_back(read_pair(*pit, name));
    }
    box.validate();
    return box;
}

nlohmann::json parameter_box_to_json(const ParameterBox& box)
{
    nlohmann::json params = nlohmann::json::object();
    const std::vector<std::string>& names = param_names(box.model);
    for (std::size_t i = 0; i < names.size(); ++i)
        params[names[i]] = {box.bounds[i].first, box.bounds[i].second};
    return {{"model", model_name(box.model)},
            {"population", box.population},
            {"e0", {box.e0_bounds.first, box.e0_bounds.second}},
            {"i0", {box.i0_bounds.first, box.i0_bounds.second}},
            {"parameters", params}};
}

std::string parameter_box_hash(const ParameterBox& box)
{
    return json_hash(parameter_box_to_json(box));
}

void write_scenario_set(const std::string& directory, const ScenarioSet& set, DetailedModel model,
                        const std::string& box_hash, std::uint64_t seed, int requested,
                        const std::string& config_hash)
{
    fs::create_directories(directory);
    const std::string betas_path = (fs::path(directory) / "scenario_betas.csv").string();
    const std::string gammas_path = (fs::path(directory) / "scenario_gammas.csv").string();
    write_matrix_csv(betas_path, to_matrix(set.betas));
    write_matrix_csv(gammas_path, to_matrix(set.gammas));

    nlohmann::json manifest = {{"artifact", "scenario-set"},
                               {"model", model_name(model)},
                               {"grid", grid_to_json(set.grid)},
                               {"count", set.count()},
                               {"requested", requested},
                               {"dropped", set.dropped},
                               {"seed", seed},
                               {"box_hash", box_hash},
                               {"files", {{"betas", "scenario_betas.csv"}, {"gammas", "scenario_gammas.csv"}}},
                               {"hashes", {{"betas", hash_file(betas_path)}, {"gammas", hash_file(gammas_path)}}},
                               {"config_hash", config_hash}};
    write_json_file((fs::path(directory) / "scenarios.json").string(), manifest);
}

ScenarioSet read_scenario_set(const std::string& manifest_path)
{
    const nlohmann::json manifest = load_json_file(manifest_path);
    const std::string context = manifest_path;
    require(json_string(manifest, "artifact", context) == "scenario-set", ErrorCode::Parse,
            context + ": not a scenario-set manifest");
    const nlohmann::json& files = json_field(manifest, "files", context);
    const nlohmann::json& hashes = json_field(manifest, "hashes", context);
    const std::string betas_path = sibling_path(manifest_path, json_string(files, "betas", context));
    const std::string gammas_path = sibling_path(manifest_path, json_string(files, "gammas", context));
    verify_hash(betas_path, json_string(hashes, "betas", context), "scenario set");
    verify_hash(gammas_path, json_string(hashes, "gammas", context), "scenario set");

    ScenarioSet set;
    set.grid = grid_from_json(json_field(manifest, "grid", context), context + " grid");
    set.dropped = static_cast<int>(json_integer(manifest, "dropped", context));
    const Eigen::MatrixXd betas = read_matrix_csv(betas_path);
    const Eigen::MatrixXd gammas = read_matrix_csv(gammas_path);
    require(betas.rows() == gammas.rows() && betas.cols() == gammas.cols(), ErrorCode::Parse,
            context + ": beta and gamma matrices disagree in shape");
    require(betas.cols() == static_cast<Eigen::Index>(set.grid.count), ErrorCode::Parse,
            context + ": matrix width does not match the manifest grid");
    require(betas.rows() == json_integer(manifest, "count", context), ErrorCode::Parse,
            context + ": row count does not match the manifest");
    for (Eigen::Index r = 0; r < betas.rows(); ++r)
    {
        set.betas.emplace_back(betas.row(r).begin(), betas.row(r).end());
        set.gammas.emplace_back(gammas.row(r).begin(), gammas.row(r).end());
    }
    return set;
}

void write_basis(const std::string& directory, const std::string& stem, const ReducedBasis& basis,
                 const std::string& family, double epsilon, std::uint64_t seed, const std::string& config_hash)
{
    require(!basis.has_exp_mode, ErrorCode::InvalidArgument,
            "exponential augmentation is a fit-time transform and is not persisted");
    fs::create_directories(directory);
    const bool raw = basis.method == BasisMethod::ENG;
    const Eigen::MatrixXd& stored = raw ? basis.raw_modes : basis.modes;
    const std::string csv_name = stem + ".csv";
    const std::string csv_path = (fs::path(directory) / csv_name).string();
    write_matrix_csv(csv_path, stored);

    nlohmann::json manifest = {{"artifact", "basis"},
                               {"family", family},
                               {"method", basis_method_name(basis.method)},
                               {"grid", grid_to_json(basis.grid)},
                               {"n", stored.rows()},
                               {"epsilon", epsilon},
                               {"seed", seed},
                               {"storage", raw ? "raw" : "modes"},
                               {"files", {{"modes", csv_name}}},
                               {"hashes", {{"modes", hash_file(csv_path)}}},
                               {"config_hash", config_hash}};
    if (basis.method == BasisMethod::SVD)
    {
        manifest["eigenvalues"] = basis.eigenvalues;
        manifest["eigen_tail"] = basis.eigenvalue_tail(static_cast<int>(stored.rows()));
    }
    if (basis.method == BasisMethod::ENG)
    {
        manifest["selected_rows"] = basis.selected_rows;
        manifest["greedy_residuals"] = basis.greedy_residuals;
    }
    write_json_file((fs::path(directory) / (stem + ".json")).string(), manifest);
}

ReducedBasis read_basis(const std::string& manifest_path)
{
    const nlohmann::json manifest = load_json_file(manifest_path);
    const std::string context = manifest_path;
    require(json_string(manifest, "artifact", context) == "basis", ErrorCode::Parse,
            context + ": not a basis manifest");

    ReducedBasis basis;
    basis.method = basis_method_from_name(json_string(manifest, "method", context));
    basis.grid = grid_from_json(json_field(manifest, "grid", context), context + " grid");
    const std::string csv_path =
        sibling_path(manifest_path, json_string(json_field(manifest, "files", context), "modes", context));
    verify_hash(csv_path, json_string(json_field(manifest, "hashes", context), "modes", context), "basis");
    const Eigen::MatrixXd stored = read_matrix_csv(csv_path);
    require(stored.cols() == static_cast<Eigen::Index>(basis.grid.count), ErrorCode::Parse,
            context + ": matrix width does not match the manifest grid");
    require(stored.rows() == json_integer(manifest, "n", context), ErrorCode::Parse,
            context + ": mode count does not match the manifest");

    basis.modes = stored;
    if (basis.method == BasisMethod::ENG)
    {
        basis.raw_modes = stored;
        const nlohmann::json& rows = json_field(manifest, "selected_rows", context);
        require(rows.is_array(), ErrorCode::Parse, context + ": selected_rows must be an array");
        basis.selected_rows = rows.get<std::vector<int>>();
        basis.greedy_residuals = json_field(manifest, "greedy_residuals", context).get<std::vector<double>>();
    }
    if (basis.method == BasisMethod::SVD)
    {
        const nlohmann::json& ev = json_field(manifest, "eigenvalues", context);
        require(ev.is_array(), ErrorCode::Parse, context + ": eigenvalues must be an array");
        basis.eigenvalues = ev.get<std::vector<double>>();
    }
    return basis;
}

void write_fit_artifact(const std::string& path, const FitArtifact& fit, const std::string& basis_manifest,
                        const std::string& basis_hash, const std::string& config_hash)
{
    nlohmann::json doc = {{"artifact", "fit"},
                          {"n", fit.n},
                          {"routine", fit.routine},
                          {"method", fit.method},
                          {"window", {fit.window_begin, fit.window_end}},
                          {"beta_coefficients", fit.beta_coefficients},
                          {"gamma_coefficients", fit.gamma_coefficients},
                          {"loss", fit.loss},
                          {"loss_bg", fit.loss_bg},
                          {"loss_ir", fit.loss_ir},
                          {"initial_state",
                           {{"index", fit.initial_index},
                            {"i", fit.initial_i},
                            {"r", fit.initial_r},
                            {"optimized", fit.initial_optimized}}},
                          {"basis", {{"manifest", basis_manifest}, {"hash", basis_hash}}},
                          {"config_hash", config_hash}};
    if (fit.augmented)
        doc["exp_mode"] = {{"beta",
                            {{"xi", fit.exp_beta_xi},
                             {"xi_prime", fit.exp_beta_xi_prime},
                             {"reversed", fit.exp_beta_reversed}}},
                           {"gamma",
                            {{"xi", fit.exp_gamma_xi},
                             {"xi_prime", fit.exp_gamma_xi_prime},
                             {"reversed", fit.exp_gamma_reversed}}}};
    write_json_file(path, doc);
}

FitArtifact read_fit_artifact(const std::string& path)
{
    const nlohmann::json doc = load_json_file(path);
    const std::string context = path;
    require(json_string(doc, "artifact", context) == "fit", ErrorCode::Parse, context + ": not a fit artifact");

    FitArtifact fit;
    fit.n = static_cast<int>(json_integer(doc, "n", context));
    fit.routine = json_string(doc, "routine", context);
    fit.method = json_string(doc, "method", context);
    const nlohmann::json& window = json_field(doc, "window", context);
    require(window.is_array() && window.size() == 2, ErrorCode::Parse, context + ": window must be [begin, end]");
    fit.window_begin = window[0].get<int>();
    fit.window_end = window[1].get<int>();
    fit.beta_coefficients = json_field(doc, "beta_coefficients", context).get<std::vector<double>>();
    fit.gamma_coefficients = json_field(doc, "gamma_coefficients", context).get<std::vector<double>>();
    const auto number_or_nan = [&](const char* key) {
        const nlohmann::json& v = json_field(doc, key, context);
        return v.is_null() ? std::nan("") : v.get<double>();
    };
    fit.loss = number_or_nan("loss");
    fit.loss_bg = number_or_nan("loss_bg");
    fit.loss_ir = number_or_nan("loss_ir");
    const nlohmann::json& init = json_field(doc, "initial_state", context);
    fit.initial_index = static_cast<int>(json_integer(init, "index", context + " initial_state"));
    fit.initial_i = json_number(init, "i", context + " initial_state");
    fit.initial_r = json_number(init, "r", context + " initial_state");
    fit.initial_optimized = json_boolean(init, "optimized", context + " initial_state");
    if (doc.contains("exp_mode"))
    {
        fit.augmented = true;
        const nlohmann::json& eb = json_field(doc["exp_mode"], "beta", context + " exp_mode");
        fit.exp_beta_xi = json_number(eb, "xi", context + " exp_mode.beta");
        fit.exp_beta_xi_prime = json_number(eb, "xi_prime", context + " exp_mode.beta");
        fit.exp_beta_reversed = json_boolean(eb, "reversed", context + " exp_mode.beta");
        const nlohmann::json& eg = json_field(doc["exp_mode"], "gamma", context + " exp_mode");
        fit.exp_gamma_xi = json_number(eg, "xi", context + " exp_mode.gamma");
        fit.exp_gamma_xi_prime = json_number(eg, "xi_prime", context + " exp_mode.gamma");
        fit.exp_gamma_reversed = json_boolean(eg, "reversed", context + " exp_mode.gamma");
    }
    return fit;
}

void write_forecast_csv(const std::string& path, const Forecast& forecast, Date series_start)
{
    const int offset = static_cast<int>(std::lround(forecast.t_start));
    std::string out = "date,I_pred,R_pred\n";
    for (std::size_t k = 0; k < forecast.size(); ++k)
    {
        const Date d{series_start.days_since_epoch + offset + static_cast<int>(k)};
        out += d.to_string();
        out += ',';
        out += format_double(forecast.i_pred[k]);
        out += ',';
        out += format_double(forecast.r_pred[k]);
        out += '\n';
    }
    write_text_file(path, out);
}

Forecast read_forecast_csv(const std::string& path, Date series_start)
{
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    require(line == "date,I_pred,R_pred", ErrorCode::Parse, path + ": expected header date,I_pred,R_pred");

    Forecast f;
    int line_no = 1;
    bool first = true;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const std::vector<std::string> fields = split_csv_line(line);
        const std::string context = path + " line " + std::to_string(line_no);
        require(fields.size() == 3, ErrorCode::Parse, context + ": expected 3 columns");
        const Date d = Date::from_string(fields[0]);
        if (first)
        {
            f.t_start = d - series_start;
            first = false;
        }
        f.i_pred.push_back(parse_double(fields[1], context));
        f.r_pred.push_back(parse_double(fields[2], context));
    }
    return f;
}

MobilityField load_mobility_eulerian(const std::string& path)
{
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    require(line == "t,i,j,lambda", ErrorCode::Parse, path + ": expected header t,i,j,lambda");

    std::map<double, std::map<std::pair<int, int>, double>> by_time;
    int regions = 0;
    int line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const std::string context = path + " line " + std::to_string(line_no);
        const std::vector<std::string> fields = split_csv_line(line);
        require(fields.size() == 4, ErrorCode::Parse, context + ": expected 4 columns");
        const double t = parse_double(fields[0], context);
        const int i = parse_index(fields[1], context);
        const int j = parse_index(fields[2], context);
        const double rate = parse_double(fields[3], context);
        require(rate >= 0.0, ErrorCode::Parse, context + ": mobility rates must be nonnegative");
        auto& slot = by_time[t];
        require(slot.emplace(std::make_pair(i, j), rate).second, ErrorCode::Parse,
                context + ": duplicate entry for (t, i, j)");
        regions = std::max(regions, std::max(i, j) + 1);
    }
    require(!by_time.empty(), ErrorCode::Parse, path + ": no mobility entries");

    std::vector<double> times;
    for (const auto& [t, entries] : by_time)
        times.push_back(t);
    double step = 1.0;
    if (times.size() >= 2)
    {
        step = times[1] - times[0];
        require(step > 0.0, ErrorCode::Parse, path + ": time values must be strictly increasing");
        for (std::size_t k = 1; k < times.size(); ++k)
            require(std::abs(times[k] - times[k - 1] - step) <= 1e-9, ErrorCode::Parse,
                    path + ": time values must form a uniform grid");
    }

    std::vector<Eigen::MatrixXd> values;
    values.reserve(times.size());
    for (const auto& [t, entries] : by_time)
    {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(regions, regions);
        for (const auto& [key, rate] : entries)
        {
            require(rate <= 1.0 + 1e-9, ErrorCode::Parse,
                    path + ": mobility entries must be probabilities in [0, 1] (t=" + format_double(t) + ")");
            m(key.first, key.second) = rate;
        }
        for (int i = 0; i < regions; ++i)
            require(std::abs(m.row(i).sum() - 1.0) <= 1e-6, ErrorCode::Parse,
                    path + ": mobility row " + std::to_string(i) + " must sum to one at t=" + format_double(t));
        values.push_back(std::move(m));
    }
    return MobilityField{TimeGrid{times.front(), step, static_cast<int>(times.size())}, std::move(values)};
}

LagrangianMobility load_mobility_lagrangian(const std::string& path)
{
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    require(line == "t,i,j,k,lambda", ErrorCode::Parse, path + ": expected header t,i,j,k,lambda");

    std::map<double, std::map<std::tuple<int, int, int>, double>> by_time;
    int regions = 0;
    int line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        const std::string context = path + " line " + std::to_string(line_no);
        const std::vector<std::string> fields = split_csv_line(line);
        require(fields.size() == 5, ErrorCode::Parse, context + ": expected 5 columns");
        const double t = parse_double(fields[0], context);
        const int i = parse_index(fields[1], context);
        const int j = parse_index(fields[2], context);
        const int k = parse_index(fields[3], context);
        const double frac = parse_double(fields[4], context);
        require(frac >= 0.0 && frac <= 1.0 + 1e-9, ErrorCode::Parse,
                context + ": presence fractions must lie in [0, 1]");
        auto& slot = by_time[t];
        require(slot.emplace(std::make_tuple(i, j, k), frac).second, ErrorCode::Parse,
                context + ": duplicate entry for (t, i, j, k)");
        regions = std::max({regions, i + 1, j + 1, k + 1});
    }
    require(!by_time.empty(), ErrorCode::Parse, path + ": no mobility entries");

    std::vector<double> times;
    for (const auto& [t, entries] : by_time)
        times.push_back(t);
    double step = 1.0;
    if (times.size() >= 2)
    {
        step = times[1] - times[0];
        require(step > 0.0, ErrorCode::Parse, path + ": time values must be strictly increasing");
        for (std::size_t k = 1; k < times.size(); ++k)
            require(std::abs(times[k] - times[k - 1] - step) <= 1e-9, ErrorCode::Parse,
                    path + ": time values must form a uniform grid");
    }

    LagrangianMobility mob;
    mob.grid = TimeGrid{times.front(), step, static_cast<int>(times.size())};
    mob.regions = regions;
    const std::size_t cube = static_cast<std::size_t>(regions) * regions * regions;
    for (const auto& [t, entries] : by_time)
    {
        std::vector<double> tensor(cube, 0.0);
        for (const auto& [key, frac] : entries)
        {
            const auto [i, j, k] = key;
            tensor[static_cast<std::size_t>((i * regions + j) * regions + k)] = frac;
        }
        // Strict stochasticity: every (home, from) row must be a full
        // probability distribution over destinations.
        for (int i = 0; i < regions; ++i)
        {
            for (int j = 0; j < regions; ++j)
            {
                double sum = 0.0;
                for (int k = 0; k < regions; ++k)
                    sum += tensor[static_cast<std::size_t>((i * regions + j) * regions + k)];
                require(std::abs(sum - 1.0) <= 1e-6, ErrorCode::Parse,
                        path + ": presence rows must sum to 1 (t=" + format_double(t) +
                            ", home=" + std::to_string(i) + ", from=" + std::to_string(j) + ")");
            }
        }
        mob.tensors.push_back(std::move(tensor));
    }
    return mob;
}

MobilityField presence_from_lagrangian(const LagrangianMobility& mobility)
{
    const int p = mobility.regions;
    std::vector<Eigen::MatrixXd> values;
    values.reserve(mobility.tensors.size());
    for (const std::vector<double>& tensor : mobility.tensors)
    {
        Eigen::MatrixXd m(p, p);
        for (int home = 0; home < p; ++home)
            for (int loc = 0; loc < p; ++loc)
                m(home, loc) = tensor[static_cast<std::size_t>((home * p + home) * p + loc)];
        values.push_back(std::move(m));
    }
    return MobilityField{mobility.grid, std::move(values)};
}

} // namespace epf
