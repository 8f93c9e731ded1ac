#include "b2bplan/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "b2bplan/error.hpp"
#include "b2bplan/format.hpp"

namespace b2b {

TimeSeries::TimeSeries(std::vector<double> values, double step_hours, std::string start_label)
    : values_(std::move(values)), step_hours_(step_hours), start_label_(std::move(start_label)) {
    if (values_.empty()) throw InvalidArgument("time series must have at least one sample");
    if (!(step_hours_ > 0.0) || !std::isfinite(step_hours_)) {
        throw InvalidArgument("time series step must be strictly positive, got " + format_number(step_hours_));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("time series value at index " + std::to_string(i) + " is not finite");
        }
    }
}

bool TimeSeries::aligned_with(const TimeSeries& other) const noexcept {
    return size() == other.size() && step_hours_ == other.step_hours_;
}

FeederProfile::FeederProfile(TimeSeries load, TimeSeries der, double backfeed_limit_kw)
    : load_(std::move(load)), der_(std::move(der)), backfeed_limit_kw_(backfeed_limit_kw) {
    if (!load_.aligned_with(der_)) {
        throw InvalidArgument("load and DER series differ in length or step");
    }
    if (!(backfeed_limit_kw_ >= 0.0) || !std::isfinite(backfeed_limit_kw_)) {
        throw InvalidArgument("back-feed limit must be a finite nonnegative kW value");
    }
    for (std::size_t i = 0; i < load_.size(); ++i) {
        if (load_[i] < 0.0) throw InvalidArgument("negative load at index " + std::to_string(i));
        if (der_[i] < 0.0) throw InvalidArgument("negative DER at index " + std::to_string(i));
    }
}

FeederProfile FeederProfile::with_backfeed_limit(double limit_kw) const {
    return FeederProfile(load_, der_, limit_kw);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail_at(std::size_t line_no, const std::string& msg) {
    throw ParseError("profile CSV line " + std::to_string(line_no) + ": " + msg);
}

}  // namespace

FeederProfile parse_profile_csv(std::istream& in, double backfeed_limit_kw) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("profile CSV is empty");
    ++line_no;
    auto header = trim(line);
    constexpr std::string_view step_key = "step_hours=";
    if (header.substr(0, step_key.size()) != step_key) {
        fail_at(line_no, "expected 'step_hours=<real>' header");
    }
    double step = 0.0;
    try {
        step = parse_number(header.substr(step_key.size()), "step_hours");
    } catch (const ParseError& e) {
        fail_at(line_no, e.what());
    }
    if (!(step > 0.0) || !std::isfinite(step)) fail_at(line_no, "step_hours must be strictly positive");

    if (!std::getline(in, line)) fail_at(line_no + 1, "missing column header");
    ++line_no;
    if (trim(line) != "index,load_kw,der_kw") fail_at(line_no, "expected column header 'index,load_kw,der_kw'");

    std::vector<double> load;
    std::vector<double> der;
    double first_index = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        auto row = trim(line);
        if (row.empty()) continue;
        auto fields = split_fields(row);
        if (fields.size() != 3) fail_at(line_no, "expected 3 fields, found " + std::to_string(fields.size()));
        double idx = 0.0, l = 0.0, d = 0.0;
        try {
            idx = parse_number(fields[0], "index");
            l = parse_number(fields[1], "load_kw");
            d = parse_number(fields[2], "der_kw");
        } catch (const ParseError& e) {
            fail_at(line_no, e.what());
        }
        if (!std::isfinite(l) || !std::isfinite(d)) fail_at(line_no, "non-finite value");
        if (load.empty()) {
            first_index = idx;
        } else if (idx != first_index + static_cast<double>(load.size())) {
            fail_at(line_no, "non-uniform step: index " + format_number(idx) + " does not follow " +
                                 format_number(first_index + static_cast<double>(load.size()) - 1.0));
        }
        if (l < 0.0) fail_at(line_no, "negative load_kw " + format_number(l));
        if (d < 0.0) fail_at(line_no, "negative der_kw " + format_number(d));
        load.push_back(l);
        der.push_back(d);
    }
    if (load.empty()) fail_at(line_no, "no data rows");

    return FeederProfile(TimeSeries(std::move(load), step), TimeSeries(std::move(der), step), backfeed_limit_kw);
}

FeederProfile load_profile_csv(const std::filesystem::path& path, double backfeed_limit_kw) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open profile CSV " + path.string());
    try {
        return parse_profile_csv(in, backfeed_limit_kw);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_profile_csv(const FeederProfile& profile, std::ostream& out) {
    out << "step_hours=" << format_number(profile.step_hours()) << '\n';
    out << "index,load_kw,der_kw\n";
    for (std::size_t i = 0; i < profile.size(); ++i) {
        out << i << ',' << format_number(profile.load()[i]) << ',' << format_number(profile.der()[i]) << '\n';
    }
}

void write_profile_csv(const FeederProfile& profile, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write profile CSV " + path.string());
    write_profile_csv(profile, out);
}

TimeSeries net_load(const FeederProfile& profile) {
    std::vector<double> net(profile.size());
    for (std::size_t i = 0; i < net.size(); ++i) net[i] = profile.load()[i] - profile.der()[i];
    return TimeSeries(std::move(net), profile.step_hours(), profile.load().start_label());
}

ProfileStats profile_stats(const TimeSeries& series) {
    const auto v = series.values();
    const double n = static_cast<double>(v.size());
    // Shifting by the first sample keeps constant series exact and limits
    // cancellation when the mean is large relative to the spread.
    const double shift = v.front();
    double sum = 0.0;
    double peak = v.front();
    for (double x : v) {
        sum += x - shift;
        peak = std::max(peak, x);
    }
    const double dmean = sum / n;
    double ss = 0.0;
    for (double x : v) ss += (x - shift - dmean) * (x - shift - dmean);
    return {shift + dmean, std::sqrt(ss / n), peak};
}

double peak_ratio(const FeederProfile& p1, const FeederProfile& p2) {
    const double peak2 = profile_stats(p2.load()).peak_kw;
    if (!(peak2 > 0.0)) throw InvalidArgument("peak ratio undefined: feeder 2 has zero peak load");
    return profile_stats(p1.load()).peak_kw / peak2;
}

namespace {

double bump(double hour, double center, double width) {
    const double z = (hour - center) / width;
    return std::exp(-0.5 * z * z);
}

// Daily shapes, unit-free. Off-window values stay below 0.75 of the in-window
// peak so two-sigma step noise cannot move the argmax out of its window.
double residential_shape(double hour) {
    return 0.51 + 0.25 * bump(hour, 7.5, 1.2) + 0.31 * bump(hour, 13.0, 3.0) + 0.58 * bump(hour, 19.5, 1.6);
}

double commercial_shape(double hour, bool weekend) {
    if (weekend) return 0.42 + 0.23 * bump(hour, 13.0, 3.0);
    return 0.42 + 0.56 * bump(hour, 13.0, 2.2);
}

double solar_bell(double hour) {
    if (hour <= 6.0 || hour >= 18.0) return 0.0;
    return std::pow(std::sin(std::numbers::pi * (hour - 6.0) / 12.0), 1.5);
}

double truncated_normal(std::mt19937_64& rng, double sigma) {
    std::normal_distribution<double> dist(0.0, sigma);
    for (;;) {
        const double x = dist(rng);
        if (std::abs(x) <= 2.0 * sigma) return x;
    }
}

}  // namespace

FeederProfile synth_profile(const SynthOptions& opts) {
    if (!(opts.peak_kw > 0.0)) throw InvalidArgument("synthetic profile peak must be positive");
    if (opts.days < 1) throw InvalidArgument("synthetic profile needs at least one day");
    if (!(opts.step_hours > 0.0)) throw InvalidArgument("synthetic profile step must be positive");
    if (!(opts.pv_peak_kw >= 0.0)) throw InvalidArgument("PV peak must be nonnegative");

    // sqrt(0.08^2 + 0.06^2) = 0.10
    constexpr double day_sigma = 0.08;
    constexpr double step_sigma = 0.06;
    constexpr double cloud_sigma = 0.08;

    // Weather draws come from their own stream so load noise and cloud cover
    // stay independent for a given seed.
    std::mt19937_64 rng(opts.seed);
    std::seed_seq weather_seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32), 0x5eedu};
    std::mt19937_64 weather(weather_seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto steps_per_day = static_cast<std::size_t>(std::llround(24.0 / opts.step_hours));
    const std::size_t n = steps_per_day * static_cast<std::size_t>(opts.days);
    std::vector<double> load(n);
    std::vector<double> der(n);

    std::size_t t = 0;
    for (int day = 0; day < opts.days; ++day) {
        const bool weekend = (day % 7) >= 5;
        const double day_factor = 1.0 + truncated_normal(rng, day_sigma);
        // Mostly clear days with occasional heavy overcast.
        const double u = unit(weather);
        const double clearness = 1.0 - 0.92 * u * u * u;
        for (std::size_t k = 0; k < steps_per_day; ++k, ++t) {
            const double hour = std::fmod(static_cast<double>(k) * opts.step_hours, 24.0);
            const double shape = opts.kind == LoadClass::residential ? residential_shape(hour)
                                                                     : commercial_shape(hour, weekend);
            load[t] = shape * day_factor * (1.0 + truncated_normal(rng, step_sigma));
            const double bell = solar_bell(hour);
            if (bell > 0.0) {
                const double passing = std::clamp(clearness * (1.0 + truncated_normal(weather, cloud_sigma)), 0.0, 1.0);
                der[t] = opts.pv_peak_kw * passing * bell;
            }
        }
    }

    const double raw_peak = *std::max_element(load.begin(), load.end());
    for (double& x : load) x = x / raw_peak * opts.peak_kw;

    return FeederProfile(TimeSeries(std::move(load), opts.step_hours), TimeSeries(std::move(der), opts.step_hours));
}

std::string to_string(LoadClass kind) {
    return kind == LoadClass::residential ? "residential" : "commercial";
}

LoadClass load_class_from_string(const std::string& s) {
    if (s == "residential" || s == "res") return LoadClass::residential;
    if (s == "commercial" || s == "comm") return LoadClass::commercial;
    throw InvalidArgument("unknown load class '" + s + "'");
}

}  // namespace b2b
