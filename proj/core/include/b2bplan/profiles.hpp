#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace b2b {

/// Uniformly sampled real-valued series (kW). Immutable after construction.
///
/// Invariants: at least one sample, strictly positive step, every value finite.
class TimeSeries {
public:
    TimeSeries(std::vector<double> values, double step_hours, std::string start_label = {});

    std::size_t size() const noexcept { return values_.size(); }
    double step_hours() const noexcept { return step_hours_; }
    const std::string& start_label() const noexcept { return start_label_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// True when both series have the same length and step.
    bool aligned_with(const TimeSeries& other) const noexcept;

private:
    std::vector<double> values_;
    double step_hours_;
    std::string start_label_;
};

/// Feeder-head load and DER generation with the feeder's back-feed limit.
class FeederProfile {
public:
    FeederProfile(TimeSeries load, TimeSeries der, double backfeed_limit_kw = 0.0);

    const TimeSeries& load() const noexcept { return load_; }
    const TimeSeries& der() const noexcept { return der_; }
    double backfeed_limit_kw() const noexcept { return backfeed_limit_kw_; }
    std::size_t size() const noexcept { return load_.size(); }
    double step_hours() const noexcept { return load_.step_hours(); }

    FeederProfile with_backfeed_limit(double limit_kw) const;

private:
    TimeSeries load_;
    TimeSeries der_;
    double backfeed_limit_kw_;
};

struct ProfileStats {
    double mean_kw = 0.0;
    double std_kw = 0.0;  // population form, 1/n_t
    double peak_kw = 0.0;
};

enum class LoadClass { residential, commercial };

// CSV ingest/emit. Format:
//   step_hours=<real>
//   index,load_kw,der_kw
//   0,<load>,<der>
//   ...
// The index column must count up by one from the first row.
FeederProfile load_profile_csv(const std::filesystem::path& path, double backfeed_limit_kw = 0.0);
FeederProfile parse_profile_csv(std::istream& in, double backfeed_limit_kw = 0.0);
void write_profile_csv(const FeederProfile& profile, std::ostream& out);
void write_profile_csv(const FeederProfile& profile, const std::filesystem::path& path);

/// load - der, elementwise. Negative values mean back-feeding.
TimeSeries net_load(const FeederProfile& profile);

ProfileStats profile_stats(const TimeSeries& series);

/// Ratio of the two feeders' peak loads, peak(p1) / peak(p2).
double peak_ratio(const FeederProfile& p1, const FeederProfile& p2);

struct SynthOptions {
    LoadClass kind = LoadClass::residential;
    double peak_kw = 1000.0;
    int days = 365;
    double step_hours = 0.5;
    double pv_peak_kw = 0.0;
    std::uint64_t seed = 1;
};

/// Deterministic synthetic feeder-head profile.
///
/// Residential load peaks in the evening, commercial load peaks around midday
/// and drops on weekends (days 5 and 6 of each week). Multiplicative noise has
/// a total standard deviation of 10% of the shape value, split between a
/// per-day factor and a per-step factor, both truncated at two sigma. The load
/// is rescaled so its maximum equals `peak_kw`. DER is a clear-sky solar bell
/// (06:00 to 18:00, peak at 12:00) scaled to `pv_peak_kw` and multiplied by a
/// seeded daily clearness factor in [0.08, 1] with 8% per-step cloud noise,
/// clamped to [0, 1]. Weather is drawn from a stream separate from the load
/// noise, so two seeds give two independent skies.
FeederProfile synth_profile(const SynthOptions& opts);

std::string to_string(LoadClass kind);
LoadClass load_class_from_string(const std::string& s);

}  // namespace b2b
