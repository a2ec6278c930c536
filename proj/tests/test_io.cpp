#include <doctest.h>

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "core/io.hpp"
#include "core/reduction.hpp"
#include "core/scenarios.hpp"
#include "core/series.hpp"
#include "helpers.hpp"

using namespace epf;
using epf_test::TempDir;
using epf_test::thrown_code;
using epf_test::write_file;

namespace
{

ScenarioSet tiny_training_set()
{
    ParameterBox box;
    box.model = DetailedModel::SE2IUR;
    box.population = 1e6;
    box.e0_bounds = {100.0, 400.0};
    box.i0_bounds = {50.0, 200.0};
    box.bounds.assign(se2iur::ParamCount, {0.0, 0.0});
    box.bounds[se2iur::beta] = {0.25, 0.75};
    box.bounds[se2iur::delta] = {0.143, 0.429};
    box.bounds[se2iur::sigma] = {0.333, 1.0};
    box.bounds[se2iur::nu] = {0.15, 0.45};
    box.bounds[se2iur::gamma1] = {0.0625, 0.1875};
    box.bounds[se2iur::gamma2] = {0.083, 0.25};
    return build_training_set(sample_parameters(box, 6, 7), TimeGrid::daily(0.0, 31));
}

} // namespace

TEST_CASE("fnv1a64 matches the published reference vectors")
{
    // Offset basis and classic test strings of the 64-bit FNV-1a function.
    CHECK(hash_hex(fnv1a64(std::string{})) == "cbf29ce484222325");
    CHECK(hash_hex(fnv1a64(std::string{"a"})) == "af63dc4c8601ec8c");
    CHECK(hash_hex(fnv1a64(std::string{"foobar"})) == "85944171f73967e8");
}

TEST_CASE("canonical_json is insensitive to key order and whitespace")
{
    const nlohmann::json a = nlohmann::json::parse(R"({"b": 1, "a": {"y": 2, "x": [1, 2]}})");
    const nlohmann::json b = nlohmann::json::parse(R"({
        "a": {"x": [1,2], "y": 2},
        "b": 1
    })");
    CHECK(canonical_json(a) == canonical_json(b));
    CHECK(json_hash(a) == json_hash(b));

    const nlohmann::json c = nlohmann::json::parse(R"({"b": 1, "a": {"y": 3, "x": [1, 2]}})");
    CHECK(json_hash(a) != json_hash(c));
}

TEST_CASE("format_double survives a parse round trip bit for bit")
{
    const std::vector<double> values = {0.1,
                                        1.0 / 3.0,
                                        2.0 / 3.0 * 1e-7,
                                        123456789.123456789,
                                        1e300,
                                        5e-324,
                                        -1.75,
                                        0.0,
                                        42.0};
    for (double v : values)
    {
        const std::string text = format_double(v);
        double back = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), back);
        REQUIRE(ec == std::errc{});
        REQUIRE(ptr == text.data() + text.size());
        CHECK(back == v);
    }
}

TEST_CASE("text and json file helpers signal the right errors")
{
    TempDir dir;
    CHECK(thrown_code([&] { read_text_file(dir.file("missing.txt")); }) == ErrorCode::Io);
    write_file(dir.file("bad.json"), "{not json");
    CHECK(thrown_code([&] { load_json_file(dir.file("bad.json")); }) == ErrorCode::Parse);

    const nlohmann::json doc = {{"num", 1.5}, {"int", 3}, {"str", "x"}, {"flag", true}};
    CHECK(json_number(doc, "num", "t") == 1.5);
    CHECK(json_integer(doc, "int", "t") == 3);
    CHECK(json_string(doc, "str", "t") == "x");
    CHECK(json_boolean(doc, "flag", "t"));
    CHECK(thrown_code([&] { json_number(doc, "missing", "t"); }) == ErrorCode::Parse);
    CHECK(thrown_code([&] { json_integer(doc, "num", "t"); }) == ErrorCode::Parse);
    CHECK(thrown_code([&] { json_string(doc, "num", "t"); }) == ErrorCode::Parse);
    CHECK(thrown_code([&] { json_boolean(doc, "str", "t"); }) == ErrorCode::Parse);

    const std::string path = dir.file("round.json");
    write_json_file(path, doc);
    CHECK(load_json_file(path) == doc);
}

TEST_CASE("matrix CSV round trip is exact, including awkward values")
{
    TempDir dir;
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(5, 7);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 7; ++c)
            m(r, c) = u(rng) * std::pow(10.0, (r * 7 + c) % 19 - 9);
    m(0, 0) = 0.0;
    m(1, 1) = 1.0 / 3.0;
    m(2, 2) = 5e-324;

    const std::string path = dir.file("m.csv");
    write_matrix_csv(path, m);
    const Eigen::MatrixXd back = read_matrix_csv(path);
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 7; ++c)
            CHECK(back(r, c) == m(r, c));

    write_file(dir.file("empty.csv"), "");
    CHECK(thrown_code([&] { read_matrix_csv(dir.file("empty.csv")); }) == ErrorCode::Parse);
    write_file(dir.file("ragged.csv"), "1,2,3\n4,5\n");
    CHECK(thrown_code([&] { read_matrix_csv(dir.file("ragged.csv")); }) == ErrorCode::InvalidArgument);
    write_file(dir.file("junk.csv"), "1,two\n");
    CHECK(thrown_code([&] { read_matrix_csv(dir.file("junk.csv")); }) == ErrorCode::Parse);
}

TEST_CASE("series CSV written by the toolkit loads back unchanged")
{
    TempDir dir;
    HealthSeries s;
    s.population = 1e6;
    Date d = Date::from_string("2020-03-01");
    for (int k = 0; k < 10; ++k)
    {
        s.dates.push_back(d);
        d = d.next();
        s.infected.push_back(100.0 + 3.7 * k);
        s.removed.push_back(40.0 + 1.1 * k);
    }
    const std::string path = dir.file("series.csv");
    write_series_csv(path, s);
    const HealthSeries back = load_csv(path, 1e6);
    REQUIRE(back.size() == s.size());
    for (int k = 0; k < s.size(); ++k)
    {
        CHECK(back.dates[static_cast<std::size_t>(k)].to_string() ==
              s.dates[static_cast<std::size_t>(k)].to_string());
        CHECK(back.infected[static_cast<std::size_t>(k)] == s.infected[static_cast<std::size_t>(k)]);
        CHECK(back.removed[static_cast<std::size_t>(k)] == s.removed[static_cast<std::size_t>(k)]);
    }
}

TEST_CASE("load_parameter_box reads the shipped defaults for both models")
{
    const std::string path = std::string(EPF_SOURCE_DIR) + "/data/parameter_boxes.json";
    const ParameterBox sei = load_parameter_box(path, DetailedModel::SEI5CHRD);
    CHECK(sei.population == 1.2e7);
    CHECK(sei.e0_bounds.first == 50.0);
    CHECK(sei.e0_bounds.second == 500.0);
    CHECK(sei.bounds.size() == static_cast<std::size_t>(sei5chrd::ParamCount));
    CHECK(sei.bounds[sei5chrd::p_ss].first == 0.05);
    CHECK(sei.bounds[sei5chrd::p_ss].second == 0.15);

    const ParameterBox se2 = load_parameter_box(path, DetailedModel::SE2IUR);
    CHECK(se2.bounds.size() == static_cast<std::size_t>(se2iur::ParamCount));
    for (const auto& [lo, hi] : se2.bounds)
        CHECK(lo <= hi);

    // Equal boxes hash equal; any bound change shows up in the hash.
    CHECK(parameter_box_hash(sei) == parameter_box_hash(load_parameter_box(path, DetailedModel::SEI5CHRD)));
    ParameterBox tweaked = sei;
    tweaked.bounds[sei5chrd::eps].second += 1e-6;
    CHECK(parameter_box_hash(tweaked) != parameter_box_hash(sei));
}

TEST_CASE("load_parameter_box rejects malformed box files")
{
    TempDir dir;
    const std::string path = dir.file("boxes.json");
    CHECK(thrown_code([&] { load_parameter_box(path, DetailedModel::SE2IUR); }) == ErrorCode::Io);

    write_file(path, R"({"version": 2, "boxes": {}})");
    CHECK(thrown_code([&] { load_parameter_box(path, DetailedModel::SE2IUR); }) == ErrorCode::Parse);

    write_file(path, R"({"version": 1, "boxes": {}})");
    CHECK(thrown_code([&] { load_parameter_box(path, DetailedModel::SE2IUR); }) == ErrorCode::Parse);

    // One parameter missing from an otherwise complete se2iur entry.
    write_file(path, R"({"version": 1, "boxes": {"SE2IUR": {
        "population": 1e6, "e0": [100, 400], "i0": [50, 200],
        "parameters": {"beta": [0.25, 0.75], "delta": [0.143, 0.429], "sigma": [0.333, 1.0],
                       "nu": [0.15, 0.45], "gamma1": [0.0625, 0.1875]}}}})");
    CHECK(thrown_code([&] { load_parameter_box(path, DetailedModel::SE2IUR); }) == ErrorCode::Parse);

    // Malformed [lo, hi] pair.
    write_file(path, R"({"version": 1, "boxes": {"SE2IUR": {
        "population": 1e6, "e0": [100, 400], "i0": [50, 200],
        "parameters": {"beta": [0.25], "delta": [0.143, 0.429], "sigma": [0.333, 1.0],
                       "nu": [0.15, 0.45], "gamma1": [0.0625, 0.1875], "gamma2": [0.083, 0.25]}}}})");
    CHECK(thrown_code([&] { load_parameter_box(path, DetailedModel::SE2IUR); }) == ErrorCode::Parse);
}

TEST_CASE("scenario sets round trip exactly and detect tampering")
{
    TempDir dir;
    const ScenarioSet set = tiny_training_set();
    REQUIRE(set.count() >= 2);
    write_scenario_set(dir.path(), set, DetailedModel::SE2IUR, "deadbeefdeadbeef", 7, 6, "cfg123");

    const std::string manifest_path = dir.file("scenarios.json");
    const nlohmann::json manifest = load_json_file(manifest_path);
    CHECK(manifest.at("artifact") == "scenario-set");
    CHECK(manifest.at("model") == "SE2IUR");
    CHECK(manifest.at("seed") == 7);
    CHECK(manifest.at("requested") == 6);
    CHECK(manifest.at("box_hash") == "deadbeefdeadbeef");
    CHECK(manifest.at("config_hash") == "cfg123");

    const ScenarioSet back = read_scenario_set(manifest_path);
    CHECK(back.grid.t0 == set.grid.t0);
    CHECK(back.grid.step == set.grid.step);
    CHECK(back.grid.count == set.grid.count);
    CHECK(back.dropped == set.dropped);
    REQUIRE(back.count() == set.count());
    for (int r = 0; r < set.count(); ++r)
        for (int k = 0; k < set.grid.count; ++k)
        {
            CHECK(back.betas[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] ==
                  set.betas[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
            CHECK(back.gammas[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] ==
                  set.gammas[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
        }

    // Any edit to the data files must be caught by the manifest hashes.
    const std::string betas_path = dir.file("scenario_betas.csv");
    write_file(betas_path, read_text_file(betas_path) + "0,0\n");
    CHECK(thrown_code([&] { read_scenario_set(manifest_path); }) == ErrorCode::Parse);
}

TEST_CASE("svd and nmf bases round trip through their artifacts")
{
    TempDir dir;
    const ScenarioSet set = tiny_training_set();
    const Eigen::MatrixXd rows = to_matrix(set.betas);

    const ReducedBasis svd = svd_basis(rows, set.grid, 3);
    write_basis(dir.path(), "beta_svd", svd, "beta", 1e-3, 42, "cfg");
    const nlohmann::json manifest = load_json_file(dir.file("beta_svd.json"));
    CHECK(manifest.at("storage") == "modes");
    CHECK(manifest.at("n") == 3);
    CHECK(manifest.at("eigen_tail").get<double>() == svd.eigenvalue_tail(3));

    const ReducedBasis svd_back = read_basis(dir.file("beta_svd.json"));
    CHECK(svd_back.method == BasisMethod::SVD);
    CHECK(svd_back.grid.count == set.grid.count);
    REQUIRE(svd_back.modes.rows() == 3);
    CHECK((svd_back.modes - svd.modes).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(svd_back.eigenvalues.size() == svd.eigenvalues.size());
    for (std::size_t i = 0; i < svd.eigenvalues.size(); ++i)
        CHECK(svd_back.eigenvalues[i] == svd.eigenvalues[i]);

    const ReducedBasis nmf = nmf_basis(rows, set.grid, 2, 200, 5);
    write_basis(dir.path(), "beta_nmf", nmf, "beta", 1e-3, 5, "cfg");
    const ReducedBasis nmf_back = read_basis(dir.file("beta_nmf.json"));
    CHECK(nmf_back.method == BasisMethod::NMF);
    CHECK((nmf_back.modes - nmf.modes).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eng bases persist the raw greedy selection")
{
    TempDir dir;
    const ScenarioSet set = tiny_training_set();
    const Eigen::MatrixXd rows = to_matrix(set.betas);
    const ReducedBasis eng = greedy_select(rows, set.grid, 3);

    write_basis(dir.path(), "beta_eng", eng, "beta", 1e-3, 0, "cfg");
    const nlohmann::json manifest = load_json_file(dir.file("beta_eng.json"));
    CHECK(manifest.at("storage") == "raw");

    const ReducedBasis back = read_basis(dir.file("beta_eng.json"));
    CHECK(back.method == BasisMethod::ENG);
    CHECK((back.raw_modes - eng.raw_modes).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.selected_rows == eng.selected_rows);
    REQUIRE(back.greedy_residuals.size() == eng.greedy_residuals.size());
    for (std::size_t i = 0; i < eng.greedy_residuals.size(); ++i)
        CHECK(back.greedy_residuals[i] == doctest::Approx(eng.greedy_residuals[i]).epsilon(1e-15));

    // Tampered mode files must not load.
    const std::string csv = dir.file("beta_eng.csv");
    std::string text = read_text_file(csv);
    text[text.find_first_of("0123456789")] = '9';
    write_file(csv, text);
    CHECK(thrown_code([&] { read_basis(dir.file("beta_eng.json")); }) == ErrorCode::Parse);
}

TEST_CASE("an augmented basis is rejected by the writer")
{
    TempDir dir;
    const ScenarioSet set = tiny_training_set();
    ReducedBasis basis = svd_basis(to_matrix(set.betas), set.grid, 2);
    basis.has_exp_mode = true;
    CHECK(thrown_code([&] { write_basis(dir.path(), "aug", basis, "beta", 1e-3, 0, "cfg"); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("forecast CSV round trips with dates anchored to the series start")
{
    TempDir dir;
    Forecast f;
    f.t_start = 31.0;
    f.i_pred = {1000.0, 900.5, 811.25};
    f.r_pred = {500.0, 600.0, 689.75};
    const Date start = Date::from_string("2020-03-01");
    const std::string path = dir.file("forecast.csv");
    write_forecast_csv(path, f, start);

    const std::string text = read_text_file(path);
    CHECK(text.substr(0, text.find('\n')) == "date,I_pred,R_pred");
    CHECK(text.find("2020-04-01,1000,500") != std::string::npos); // day 31 after 2020-03-01

    const Forecast back = read_forecast_csv(path, start);
    CHECK(back.t_start == 31.0);
    REQUIRE(back.size() == f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
    {
        CHECK(back.i_pred[k] == f.i_pred[k]);
        CHECK(back.r_pred[k] == f.r_pred[k]);
    }

    write_file(dir.file("bad_header.csv"), "date,I,R\n2020-03-01,1,2\n");
    CHECK(thrown_code([&] { read_forecast_csv(dir.file("bad_header.csv"), start); }) == ErrorCode::Parse);
    write_file(dir.file("short_row.csv"), "date,I_pred,R_pred\n2020-03-01,1\n");
    CHECK(thrown_code([&] { read_forecast_csv(dir.file("short_row.csv"), start); }) == ErrorCode::Parse);

    write_file(dir.file("empty.csv"), "date,I_pred,R_pred\n");
    const Forecast none = read_forecast_csv(dir.file("empty.csv"), start);
    CHECK(none.size() == 0);
}

TEST_CASE("load_mobility_eulerian parses sparse entries and validates stochasticity")
{
    TempDir dir;
    const std::string path = dir.file("mob.csv");
    // Region 0 stays home at t=0 (the 0->1 entry is omitted and defaults to
    // zero); both rows mix at t=5.
    write_file(path, "t,i,j,lambda\n"
                     "0,0,0,1\n"
                     "0,1,0,0.3\n"
                     "0,1,1,0.7\n"
                     "5,0,0,0.8\n"
                     "5,0,1,0.2\n"
                     "5,1,0,0.4\n"
                     "5,1,1,0.6\n");
    const MobilityField field = load_mobility_eulerian(path);
    CHECK(field.regions() == 2);
    CHECK(field.grid.t0 == 0.0);
    CHECK(field.grid.step == 5.0);
    CHECK(field.grid.count == 2);
    CHECK(field.values[0](0, 0) == 1.0);
    CHECK(field.values[0](0, 1) == 0.0);
    CHECK(field.values[0](1, 0) == 0.3);
    CHECK(field.values[1](0, 1) == 0.2);

    write_file(path, "t,i,j,lambda\n0,0,0,0.9\n");
    CHECK(thrown_code([&] { load_mobility_eulerian(path); }) == ErrorCode::Parse); // row sums to 0.9

    write_file(path, "t,i,j,lambda\n0,0,0,1\n0,0,0,1\n");
    CHECK(thrown_code([&] { load_mobility_eulerian(path); }) == ErrorCode::Parse); // duplicate entry

    write_file(path, "t,i,j,lambda\n0,0,0,-0.1\n");
    CHECK(thrown_code([&] { load_mobility_eulerian(path); }) == ErrorCode::Parse); // negative rate

    write_file(path, "t,i,j,lambda\n0,0,0,1\n1,0,0,1\n3,0,0,1\n");
    CHECK(thrown_code([&] { load_mobility_eulerian(path); }) == ErrorCode::Parse); // non-uniform times

    write_file(path, "time,i,j,lambda\n0,0,0,1\n");
    CHECK(thrown_code([&] { load_mobility_eulerian(path); }) == ErrorCode::Parse); // wrong header

    write_file(path, "t,i,j,lambda\n0,0.5,0,1\n");
    CHECK(thrown_code([&] { load_mobility_eulerian(path); }) == ErrorCode::Parse); // fractional index
}

TEST_CASE("load_mobility_lagrangian validates per-(home,from) distributions")
{
    TempDir dir;
    const std::string path = dir.file("lag.csv");
    write_file(path, "t,i,j,k,lambda\n"
                     "0,0,0,0,0.9\n"
                     "0,0,0,1,0.1\n"
                     "0,0,1,0,0.5\n"
                     "0,0,1,1,0.5\n"
                     "0,1,0,0,1\n"
                     "0,1,0,1,0\n"
                     "0,1,1,0,0.2\n"
                     "0,1,1,1,0.8\n");
    const LagrangianMobility mob = load_mobility_lagrangian(path);
    CHECK(mob.regions == 2);
    CHECK(mob.grid.count == 1);
    REQUIRE(mob.tensors.size() == 1);
    CHECK(mob.tensors[0][0] == 0.9);                      // (home 0, from 0, to 0)
    CHECK(mob.tensors[0][(1 * 2 + 1) * 2 + 1] == 0.8);    // (home 1, from 1, to 1)

    // The day-trip presence rows are the home slices of the tensor.
    const MobilityField presence = presence_from_lagrangian(mob);
    CHECK(presence.regions() == 2);
    CHECK(presence.values[0](0, 0) == 0.9);
    CHECK(presence.values[0](0, 1) == 0.1);
    CHECK(presence.values[0](1, 0) == 0.2);
    CHECK(presence.values[0](1, 1) == 0.8);

    // A missing destination breaks the (home, from) distribution.
    write_file(path, "t,i,j,k,lambda\n"
                     "0,0,0,0,0.9\n"
                     "0,0,1,0,0.5\n"
                     "0,0,1,1,0.5\n"
                     "0,1,0,0,1\n"
                     "0,1,0,1,0\n"
                     "0,1,1,0,0.2\n"
                     "0,1,1,1,0.8\n");
    CHECK(thrown_code([&] { load_mobility_lagrangian(path); }) == ErrorCode::Parse);

    write_file(path, "t,i,j,k,lambda\n0,0,0,0,1.3\n");
    CHECK(thrown_code([&] { load_mobility_lagrangian(path); }) == ErrorCode::Parse); // fraction above one

    write_file(path, "t,i,j,k,lambda\n0,0,0,0,1\n0,0,0,0,1\n");
    CHECK(thrown_code([&] { load_mobility_lagrangian(path); }) == ErrorCode::Parse); // duplicate entry
}
