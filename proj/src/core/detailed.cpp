#include "core/detailed.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "core/rk4.hpp"

namespace epf
{

namespace sei5chrd
{
const std::vector<std::string>& param_names()
{
    static const std::vector<std::string> names = {
        "beta_p", "beta_a", "beta_ps", "beta_ms", "beta_ss",   "beta_H",    "beta_C",    "eps",       "mu_p", "p_a",
        "mu",     "p_ps",   "p_ms",    "p_ss",    "p_C",       "lambda_CR", "lambda_CD", "lambda_HR", "lambda_HD"};
    return names;
}
} // namespace sei5chrd

namespace se2iur
{
const std::vector<std::string>& param_names()
{
    static const std::vector<std::string> names = {"beta", "delta", "sigma", "nu", "gamma1", "gamma2"};
    return names;
}
} // namespace se2iur

std::string model_name(DetailedModel model)
{
    return model == DetailedModel::SEI5CHRD ? "SEI5CHRD" : "SE2IUR";
}

DetailedModel model_from_name(const std::string& name)
{
    if (name == "SEI5CHRD") {
        return DetailedModel::SEI5CHRD;
    }
    if (name == "SE2IUR") {
        return DetailedModel::SE2IUR;
    }
    fail(ErrorCode::InvalidArgument, "unknown detailed model '" + name + "'");
}

int compartment_count(DetailedModel model)
{
    return model == DetailedModel::SEI5CHRD ? static_cast<int>(sei5chrd::Count) : static_cast<int>(se2iur::Count);
}

int param_count(DetailedModel model)
{
    return model == DetailedModel::SEI5CHRD ? static_cast<int>(sei5chrd::ParamCount)
                                            : static_cast<int>(se2iur::ParamCount);
}

const std::vector<std::string>& param_names(DetailedModel model)
{
    return model == DetailedModel::SEI5CHRD ? sei5chrd::param_names() : se2iur::param_names();
}

double DetailedParams::population() const
{
    return std::accumulate(u0.begin(), u0.end(), 0.0);
}

void DetailedParams::validate() const
{
    require(static_cast<int>(mu.size()) == param_count(model), ErrorCode::InvalidArgument,
            "DetailedParams: expected " + std::to_string(param_count(model)) + " parameters for " + model_name(model));
    require(static_cast<int>(u0.size()) == compartment_count(model), ErrorCode::InvalidArgument,
            "DetailedParams: expected " + std::to_string(compartment_count(model)) + " initial compartments");
    for (double v : mu) {
        require(v >= 0.0, ErrorCode::Domain, "DetailedParams: negative parameter");
    }
    for (double v : u0) {
        require(v >= 0.0, ErrorCode::Domain, "DetailedParams: negative initial compartment");
    }
    require(population() > 0.0, ErrorCode::Domain, "DetailedParams: initial population must be positive");

    if (model == DetailedModel::SEI5CHRD) {
        using namespace sei5chrd;
        for (int p : {p_a, p_ps, p_ms, p_ss, p_C}) {
            require(mu[p] >= 0.0 && mu[p] <= 1.0, ErrorCode::Domain,
                    "DetailedParams: probability " + param_names()[p] + " outside [0,1]");
        }
        double sum = mu[p_ps] + mu[p_ms] + mu[p_ss];
        require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::Domain,
                "DetailedParams: p_ps + p_ms + p_ss must equal 1 (got " + std::to_string(sum) + ")");
    }
    else {
        using namespace se2iur;
        require(mu[nu] >= 0.0 && mu[nu] <= 1.0, ErrorCode::Domain, "DetailedParams: probability nu outside [0,1]");
    }
}

void detailed_rhs(DetailedModel model, const std::vector<double>& mu, const std::vector<double>& state,
                  std::vector<double>& dstate)
{
    dstate.resize(state.size());
    double N = std::accumulate(state.begin(), state.end(), 0.0);
    if (model == DetailedModel::SEI5CHRD) {
        using namespace sei5chrd;
        // Contact mix of all infectious compartments, weighted by their
        // compartment-specific transmission rates.
        double mix = mu[beta_p] * state[Ip] + mu[beta_a] * state[Ia] + mu[beta_ps] * state[Ips] +
                     mu[beta_ms] * state[Ims] + mu[beta_ss] * state[Iss] + mu[beta_H] * state[H] +
                     mu[beta_C] * state[C];
        double infection = state[S] * mix / N;
        double branch = (1.0 - mu[p_a]) * mu[mu_p] * state[Ip];
        dstate[S] = -infection;
        dstate[E] = infection - mu[eps] * state[E];
        dstate[Ip] = mu[eps] * state[E] - mu[mu_p] * state[Ip];
        dstate[Ia] = mu[p_a] * mu[mu_p] * state[Ip] - mu[sei5chrd::mu] * state[Ia];
        dstate[Ips] = mu[p_ps] * branch - mu[sei5chrd::mu] * state[Ips];
        dstate[Ims] = mu[p_ms] * branch - mu[sei5chrd::mu] * state[Ims];
        dstate[Iss] = mu[p_ss] * branch - mu[sei5chrd::mu] * state[Iss];
        dstate[C] = mu[p_C] * mu[sei5chrd::mu] * state[Iss] - (mu[lambda_CR] + mu[lambda_CD]) * state[C];
        dstate[H] = (1.0 - mu[p_C]) * mu[sei5chrd::mu] * state[Iss] - (mu[lambda_HR] + mu[lambda_HD]) * state[H];
        // Mild courses (Ia, Ips, Ims) recover at rate mu; without these terms
        // the compartment sum would not be conserved.
        dstate[R] = mu[sei5chrd::mu] * (state[Ia] + state[Ips] + state[Ims]) + mu[lambda_CR] * state[C] +
                    mu[lambda_HR] * state[H];
        dstate[D] = mu[lambda_CD] * state[C] + mu[lambda_HD] * state[H];
    }
    else {
        using namespace se2iur;
        double infection = mu[beta] * state[S] * (state[E2] + state[U] + state[I]) / N;
        dstate[S] = -infection;
        dstate[E1] = infection - mu[delta] * state[E1];
        dstate[E2] = mu[delta] * state[E1] - mu[sigma] * state[E2];
        dstate[I] = mu[nu] * mu[sigma] * state[E2] - mu[gamma1] * state[I];
        dstate[U] = (1.0 - mu[nu]) * mu[sigma] * state[E2] - mu[gamma2] * state[U];
        dstate[R] = mu[gamma1] * state[I] + mu[gamma2] * state[U];
    }
}

DetailedTrajectory simulate_detailed(const DetailedParams& params, const TimeGrid& grid, double substep)
{
    params.validate();
    int d = compartment_count(params.model);
    double N = params.population();

    DetailedTrajectory out;
    out.model = params.model;
    out.grid = grid;
    out.population = N;
    out.comp.assign(d, std::vector<double>(grid.count));

    std::vector<double> y = params.u0;
    auto rhs = [&](double, const std::vector<double>& u, std::vector<double>& du) {
        detailed_rhs(params.model, params.mu, u, du);
    };
    for (int k = 0; k < grid.count; ++k) {
        if (k > 0) {
            rk4_integrate(y, grid.time(k - 1), grid.time(k), substep, rhs);
        }
        double total = 0.0;
        for (int c = 0; c < d; ++c) {
            require(y[c] >= -1e-12 * N, ErrorCode::Numeric,
                    "simulate_detailed: negative compartment at t = " + std::to_string(grid.time(k)));
            out.comp[c][k] = y[c];
            total += y[c];
        }
        require(std::abs(total - N) <= 1e-9 * N, ErrorCode::Numeric,
                "simulate_detailed: population drift at t = " + std::to_string(grid.time(k)));
    }
    return out;
}

void write_trajectory_csv(const DetailedTrajectory& traj, const std::string& path)
{
    std::ofstream out(path);
    require(out.good(), ErrorCode::Io, "write_trajectory_csv: cannot open '" + path + "'");
    static const char* sei5chrd_names[] = {"S", "E", "Ip", "Ia", "Ips", "Ims", "Iss", "C", "H", "R", "D"};
    static const char* se2iur_names[] = {"S", "E1", "E2", "I", "U", "R"};
    const char** names = traj.model == DetailedModel::SEI5CHRD ? sei5chrd_names : se2iur_names;
    int d = compartment_count(traj.model);
    out << "t";
    for (int c = 0; c < d; ++c) {
        out << ',' << names[c];
    }
    out << '\n';
    out.precision(17);
    for (int k = 0; k < traj.grid.count; ++k) {
        out << traj.grid.time(k);
        for (int c = 0; c < d; ++c) {
            out << ',' << traj.comp[c][k];
        }
        out << '\n';
    }
    require(out.good(), ErrorCode::Io, "write_trajectory_csv: write failed for '" + path + "'");
}

} // namespace epf
