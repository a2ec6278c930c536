#include "epiforecast/epiforecast.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/common.hpp"
#include "core/pipeline.hpp"
#include "core/series.hpp"
#include "core/sir.hpp"

struct epf_ctx
{
    std::string last_error;
};

struct epf_series
{
    epf::HealthSeries series;
};

namespace
{

epf_status code_to_status(epf::ErrorCode code)
{
    return static_cast<epf_status>(static_cast<int>(code));
}

template <typename Fn>
epf_status guarded(epf_ctx* ctx, Fn&& fn)
{
    if (ctx != nullptr)
        ctx->last_error.clear();
    try
    {
        fn();
        return EPF_OK;
    }
    catch (const epf::EpfError& e)
    {
        if (ctx != nullptr)
            ctx->last_error = e.what();
        return code_to_status(e.code());
    }
    catch (const std::bad_alloc&)
    {
        if (ctx != nullptr)
            ctx->last_error = "out of memory";
        return EPF_ERR_NUMERIC;
    }
    catch (const std::exception& e)
    {
        if (ctx != nullptr)
            ctx->last_error = e.what();
        return EPF_ERR_NUMERIC;
    }
}

epf_status invalid(epf_ctx* ctx, const char* message)
{
    if (ctx != nullptr)
        ctx->last_error = message;
    return EPF_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

epf_ctx* epf_ctx_create(void)
{
    return new (std::nothrow) epf_ctx{};
}

void epf_ctx_destroy(epf_ctx* ctx)
{
    delete ctx;
}

const char* epf_last_error(const epf_ctx* ctx)
{
    return ctx != nullptr ? ctx->last_error.c_str() : "";
}

const char* epf_version(void)
{
    return "1.0.0";
}

epf_status epf_run(epf_ctx* ctx, const char* command, const char* config_path, const epf_run_options* options)
{
    if (command == nullptr || config_path == nullptr)
        return invalid(ctx, "command and config path are required");
    return guarded(ctx, [&] {
        epf::PipelineOverrides overrides;
        if (options != nullptr)
        {
            overrides.population = options->population;
            overrides.adjustment_factor = options->adjustment_factor;
            overrides.smooth_window = options->smooth_window;
            overrides.jobs = options->jobs;
            overrides.emit_plot_data = options->emit_plot_data != 0;
        }
        const epf::PipelineConfig config = epf::load_pipeline_config(config_path, overrides);
        epf::run_pipeline_command(command, config);
    });
}

epf_status epf_series_load(epf_ctx* ctx, const char* csv_path, double population, epf_series** out)
{
    if (csv_path == nullptr || out == nullptr)
        return invalid(ctx, "csv path and output handle are required");
    *out = nullptr;
    return guarded(ctx, [&] {
        auto handle = new epf_series{epf::load_csv(csv_path, population)};
        *out = handle;
    });
}

void epf_series_destroy(epf_series* series)
{
    delete series;
}

int epf_series_size(const epf_series* series)
{
    return series != nullptr ? series->series.size() : 0;
}

epf_status epf_series_date(epf_ctx* ctx, const epf_series* series, int index, char* buffer, size_t buffer_size)
{
    if (series == nullptr || buffer == nullptr)
        return invalid(ctx, "series and buffer are required");
    return guarded(ctx, [&] {
        epf::require(index >= 0 && index < series->series.size(), epf::ErrorCode::InvalidArgument,
                     "sample index out of range");
        const std::string iso = series->series.dates[static_cast<std::size_t>(index)].to_string();
        epf::require(buffer_size > iso.size(), epf::ErrorCode::InvalidArgument, "date buffer too small");
        std::memcpy(buffer, iso.c_str(), iso.size() + 1);
    });
}

epf_status epf_series_values(epf_ctx* ctx, const epf_series* series, double* infected, double* removed)
{
    if (series == nullptr)
        return invalid(ctx, "series is required");
    return guarded(ctx, [&] {
        const std::size_t count = series->series.infected.size();
        if (infected != nullptr)
            std::memcpy(infected, series->series.infected.data(), count * sizeof(double));
        if (removed != nullptr)
            std::memcpy(removed, series->series.removed.data(), count * sizeof(double));
    });
}

epf_status epf_series_smooth(epf_ctx* ctx, const epf_series* in, int window, epf_series** out)
{
    if (in == nullptr || out == nullptr)
        return invalid(ctx, "input series and output handle are required");
    *out = nullptr;
    return guarded(ctx, [&] { *out = new epf_series{epf::smooth(in->series, window)}; });
}

epf_status epf_series_adjust(epf_ctx* ctx, const epf_series* in, double factor, epf_series** out)
{
    if (in == nullptr || out == nullptr)
        return invalid(ctx, "input series and output handle are required");
    *out = nullptr;
    return guarded(ctx, [&] { *out = new epf_series{epf::apply_adjustment(in->series, factor)}; });
}

epf_status epf_series_monotone_removed(epf_ctx* ctx, const epf_series* in, epf_series** out)
{
    if (in == nullptr || out == nullptr)
        return invalid(ctx, "input series and output handle are required");
    *out = nullptr;
    return guarded(ctx, [&] { *out = new epf_series{epf::enforce_monotone_removed(in->series)}; });
}

epf_status epf_observed_rates(epf_ctx* ctx, const epf_series* series, double* beta, double* gamma)
{
    if (series == nullptr || beta == nullptr || gamma == nullptr)
        return invalid(ctx, "series and both rate arrays are required");
    return guarded(ctx, [&] {
        const epf::ObservedRates rates = epf::observed_rates(series->series);
        const std::size_t count = rates.beta_star.values.size();
        std::memcpy(beta, rates.beta_star.values.data(), count * sizeof(double));
        std::memcpy(gamma, rates.gamma_star.values.data(), count * sizeof(double));
    });
}

epf_status epf_simulate_sir(epf_ctx* ctx, double population, double i0, double r0, const double* beta,
                            const double* gamma, int count, double substep, double* infected, double* removed)
{
    if (beta == nullptr || gamma == nullptr || infected == nullptr || removed == nullptr)
        return invalid(ctx, "rate and output arrays are required");
    if (count < 2)
        return invalid(ctx, "at least two daily samples are required");
    return guarded(ctx, [&] {
        const epf::TimeGrid grid = epf::TimeGrid::daily(0.0, count);
        const epf::RateFunction beta_fn(grid, std::vector<double>(beta, beta + count));
        const epf::RateFunction gamma_fn(grid, std::vector<double>(gamma, gamma + count));
        epf::SirOptions options;
        if (substep > 0.0)
            options.substep = substep;
        const epf::SirTrajectory traj =
            epf::simulate_sir_tv(beta_fn, gamma_fn, population - i0 - r0, i0, r0, grid, options);
        std::memcpy(infected, traj.i.data(), static_cast<std::size_t>(count) * sizeof(double));
        std::memcpy(removed, traj.r.data(), static_cast<std::size_t>(count) * sizeof(double));
    });
}

} // extern "C"
