#include "core/series.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace epf
{

namespace
{

int days_from_civil(int y, int m, int d)
{
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    require(ymd.ok(), ErrorCode::Parse,
            "invalid calendar date " + std::to_string(y) + "-" + std::to_string(m) + "-" + std::to_string(d));
    return static_cast<int>(sys_days{ymd}.time_since_epoch().count());
}

} // namespace

Date Date::from_string(const std::string& iso)
{
    int y = 0, m = 0, d = 0;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(iso);
    in >> y >> sep1 >> m >> sep2 >> d;
    require(!in.fail() && sep1 == '-' && sep2 == '-', ErrorCode::Parse, "expected ISO-8601 date, got '" + iso + "'");
    // istream reads "-03" of "2020-03-15" as a negative number; re-split strictly.
    auto p1 = iso.find('-', 1);
    auto p2 = (p1 == std::string::npos) ? std::string::npos : iso.find('-', p1 + 1);
    require(p1 != std::string::npos && p2 != std::string::npos, ErrorCode::Parse,
            "expected ISO-8601 date, got '" + iso + "'");
    y = std::stoi(iso.substr(0, p1));
    m = std::stoi(iso.substr(p1 + 1, p2 - p1 - 1));
    d = std::stoi(iso.substr(p2 + 1));
    return Date{days_from_civil(y, m, d)};
}

Date Date::from_ymd(int year, int month, int day)
{
    return Date{days_from_civil(year, month, day)};
}

std::string Date::to_string() const
{
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{days_since_epoch}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

void HealthSeries::validate() const
{
    require(population > 0.0, ErrorCode::InvalidArgument, "HealthSeries: population must be positive");
    require(size() >= 2, ErrorCode::InvalidArgument, "HealthSeries: need at least 2 samples");
    require(dates.size() == infected.size() && dates.size() == removed.size(), ErrorCode::InvalidArgument,
            "HealthSeries: dates, infected, removed must have equal length");
    for (int k = 0; k < size(); ++k) {
        require(infected[k] >= 0.0 && removed[k] >= 0.0, ErrorCode::Domain,
                "HealthSeries: negative count at " + dates[k].to_string());
        require(infected[k] + removed[k] <= population, ErrorCode::Domain,
                "HealthSeries: infected + removed exceeds population at " + dates[k].to_string());
    }
}

HealthSeries load_csv(const std::string& path, double population)
{
    require(population > 0.0, ErrorCode::InvalidArgument, "load_csv: population must be positive");
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "load_csv: cannot open '" + path + "'");

    HealthSeries out;
    out.population = population;

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Parse, "load_csv: empty file '" + path + "'");
    // Tolerate a UTF-8 BOM and surrounding whitespace in the header.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(), ::isspace), header.end());
    require(header == "date,infected,removed", ErrorCode::Parse,
            "load_csv: expected header 'date,infected,removed', got '" + line + "'");

    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream cells(line);
        std::string date_s, inf_s, rem_s;
        bool ok = static_cast<bool>(std::getline(cells, date_s, ',')) &&
                  static_cast<bool>(std::getline(cells, inf_s, ',')) && static_cast<bool>(std::getline(cells, rem_s));
        require(ok, ErrorCode::Parse, "load_csv: malformed row " + std::to_string(row) + " in '" + path + "'");

        Date date = Date::from_string(date_s);
        double inf = 0.0, rem = 0.0;
        try {
            inf = std::stod(inf_s);
            rem = std::stod(rem_s);
        }
        catch (const std::exception&) {
            fail(ErrorCode::Parse, "load_csv: non-numeric value in row " + std::to_string(row));
        }
        require(inf >= 0.0 && rem >= 0.0, ErrorCode::Parse,
                "load_csv: negative value in row " + std::to_string(row) + " (" + date_s + ")");
        if (!out.dates.empty()) {
            int gap = date - out.dates.back();
            require(gap == 1, ErrorCode::Parse,
                    "load_csv: dates must be consecutive days; gap of " + std::to_string(gap) + " days before " +
                        date_s + " (row " + std::to_string(row) + ")");
        }
        out.dates.push_back(date);
        out.infected.push_back(inf);
        out.removed.push_back(rem);
    }
    out.validate();
    return out;
}

HealthSeries smooth(const HealthSeries& series, int window)
{
    require(window >= 1 && window % 2 == 1, ErrorCode::InvalidArgument, "smooth: window must be odd and positive");
    require(window <= series.size(), ErrorCode::InvalidArgument, "smooth: window exceeds series length");

    HealthSeries out = series;
    int n = series.size();
    int half = window / 2;
    auto average = [n, half](const std::vector<double>& v, int k) {
        int h = std::min({half, k, n - 1 - k});
        double sum = 0.0;
        for (int j = k - h; j <= k + h; ++j) {
            sum += v[j];
        }
        return sum / (2 * h + 1);
    };
    for (int k = 0; k < n; ++k) {
        out.infected[k] = average(series.infected, k);
        out.removed[k] = average(series.removed, k);
    }
    return out;
}

HealthSeries apply_adjustment(const HealthSeries& series, double factor)
{
    require(factor > 0.0, ErrorCode::InvalidArgument, "apply_adjustment: factor must be positive");
    HealthSeries out = series;
    for (int k = 0; k < series.size(); ++k) {
        out.infected[k] = series.infected[k] * factor;
        out.removed[k] = series.removed[k] * factor;
        require(out.infected[k] + out.removed[k] <= series.population, ErrorCode::Domain,
                "apply_adjustment: scaled counts exceed population at " + series.dates[k].to_string());
    }
    return out;
}

HealthSeries enforce_monotone_removed(const HealthSeries& series, int* repaired)
{
    HealthSeries out = series;
    int count = 0;
    double running = 0.0;
    for (int k = 0; k < series.size(); ++k) {
        running = std::max(running, series.removed[k]);
        if (running > series.removed[k]) {
            ++count;
        }
        out.removed[k] = running;
    }
    if (repaired != nullptr) {
        *repaired = count;
    }
    return out;
}

std::vector<double> finite_differences(const std::vector<double>& values, double step)
{
    int n = static_cast<int>(values.size());
    require(n >= 2, ErrorCode::InvalidArgument, "finite_differences: need at least 2 samples");
    std::vector<double> d(n);
    d[0] = (values[1] - values[0]) / step;
    for (int k = 1; k < n - 1; ++k) {
        d[k] = (values[k + 1] - values[k - 1]) / (2.0 * step);
    }
    d[n - 1] = (values[n - 1] - values[n - 2]) / step;
    return d;
}

ObservedRates observed_rates(const HealthSeries& series)
{
    series.validate();
    int n = series.size();
    double N = series.population;

    std::vector<double> s(n);
    for (int k = 0; k < n; ++k) {
        require(series.infected[k] > 0.0, ErrorCode::Domain,
                "observed_rates: infected is zero at " + series.dates[k].to_string());
        s[k] = series.susceptible(k);
        require(s[k] > 0.0, ErrorCode::Domain,
                "observed_rates: susceptible is zero at " + series.dates[k].to_string());
    }

    std::vector<double> ds = finite_differences(s, 1.0);
    std::vector<double> dr = finite_differences(series.removed, 1.0);

    ObservedRates out;
    out.grid = series.grid();
    std::vector<double> beta(n), gamma(n);
    int clamped = 0;
    for (int k = 0; k < n; ++k) {
        beta[k] = -N / (series.infected[k] * s[k]) * ds[k];
        gamma[k] = dr[k] / series.infected[k];
        if (beta[k] < 0.0) {
            beta[k] = 0.0;
            ++clamped;
        }
        if (gamma[k] < 0.0) {
            gamma[k] = 0.0;
            ++clamped;
        }
    }
    out.beta_star = RateFunction(out.grid, std::move(beta));
    out.gamma_star = RateFunction(out.grid, std::move(gamma));
    out.clamp_count = clamped;
    out.r0.resize(n);
    for (int k = 0; k < n; ++k) {
        double g = out.gamma_star.values[k];
        out.r0[k] = g > 0.0 ? out.beta_star.values[k] / g : 0.0;
    }
    return out;
}

} // namespace epf
