// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "occ/synthgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "occ/error.hpp"

namespace occ {
namespace {

constexpr double kDaySeconds = 86400.0;
constexpr double kDaysPerMonth = 30.4375;
constexpr std::int64_t kReferenceStart = 1654041600;  // 2022-06-01T00:00:00Z
constexpr std::int64_t kTransferStart = 1704067200;   // 2024-01-01T00:00:00Z
constexpr double kDefaultOccupiedCo2 = 900.0;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// +1 at midsummer, -1 at midwinter.
double season_phase(std::int64_t t) {
  const double day = std::fmod(static_cast<double>(t) / kDaySeconds, 365.2425);
  return std::cos(2.0 * M_PI * (day - 196.0) / 365.2425);
}

double hour_of_day(std::int64_t t) {
  const auto s = ((t % 86400) + 86400) % 86400;
  return static_cast<double>(s) / 3600.0;
}

double truncated_normal(std::mt19937_64& rng, double sd) {
  if (sd <= 0.0) return 0.0;
  std::normal_distribution<double> n(0.0, 1.0);
  double z;
  do {
    z = n(rng);
  } while (std::abs(z) > 3.0);
  return sd * z;
}

struct OuProcess {
  double value = 0.0;
  double decay = 1.0;
  double shock = 0.0;

  OuProcess(double sd, double tau_hours, double dt, std::mt19937_64& rng) {
    if (sd <= 0.0) return;
    decay = std::exp(-dt / (tau_hours * 3600.0));
    shock = sd * std::sqrt(1.0 - decay * decay);
    value = std::normal_distribution<double>(0.0, sd)(rng);
  }
  double step(std::mt19937_64& rng) {
    if (shock > 0.0) value = value * decay + shock * std::normal_distribution<double>(0.0, 1.0)(rng);
    return value;
  }
};

}  // namespace

double ApartmentParams::generation_for(double target, double outdoor, double volume, double ach) {
  return (target - outdoor) * volume * ach / 3600.0;
}

double ApartmentParams::generation() const {
  return co2_gen_per_person > 0.0 ? co2_gen_per_person
                                  : generation_for(kDefaultOccupiedCo2, outdoor_co2, volume, ventilation_rate);
}

double ApartmentParams::steady_state_co2(int occupants) const {
  return outdoor_co2 + occupants * generation() / (volume * ventilation_rate / 3600.0);
}

void ApartmentParams::validate() const {
  const double positive[] = {volume, ventilation_rate, outdoor_co2, thermal_time_constant, setpoint_temp,
                             occupant_temp_gain, rh_baseline, rh_occupant_gain, rh_time_constant};
  for (double v : positive)
    if (!(v > 0.0)) throw Error(ErrorCode::kInvalidArgument, "apartment parameters must be positive");
  if (co2_gen_per_person < 0.0 || noise_co2 < 0.0 || noise_temp < 0.0 || noise_rh < 0.0)
    throw Error(ErrorCode::kInvalidArgument, "generation and noise must be non-negative");
}

void SchedulerParams::validate() const {
  if (!(mean_occupied_duration > 0.0) || !(mean_vacant_duration > 0.0) || min_duration < 0.0)
    throw Error(ErrorCode::kInvalidArgument, "sojourn durations must be positive");
}

double diurnal_bias(double hour) { return std::cos(2.0 * M_PI * (hour - 3.0) / 24.0); }

Schedule gen_schedule(const SchedulerParams& params, std::int64_t start, double horizon_days) {
  params.validate();
  if (horizon_days < 1.0) throw Error(ErrorCode::kInvalidArgument, "schedule horizon must be at least one day");
  Schedule s;
  s.start = start;
  const auto n = static_cast<std::size_t>(std::llround(horizon_days * kDaySeconds / static_cast<double>(s.sample_period)));
  s.occupied.reserve(n);
  std::mt19937_64 rng(params.seed);
  std::exponential_distribution<double> unit_exp(1.0);
  bool occupied = diurnal_bias(hour_of_day(start)) > 0.0;
  while (s.occupied.size() < n) {
    const auto t = start + static_cast<std::int64_t>(s.occupied.size()) * s.sample_period;
    const double bias = params.diurnal_modulation * diurnal_bias(hour_of_day(t));
    const double mean = occupied ? params.mean_occupied_duration * std::exp(bias)
                                 : params.mean_vacant_duration * std::exp(-bias);
    const double minutes = params.min_duration + mean * unit_exp(rng);
    const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(minutes * 60.0 / s.sample_period)));
    s.occupied.insert(s.occupied.end(), std::min(len, n - s.occupied.size()), occupied ? 1 : 0);
    occupied = !occupied;
  }
  return s;
}

WeeklyTimetable WeeklyTimetable::standard() {
  const std::vector<std::pair<int, int>> weekday = {{0, 460}, {750, 795}, {1050, 1140}, {1180, 1440}};
  WeeklyTimetable w;
  w.days.assign(5, weekday);
  w.days.push_back({{0, 600}, {720, 900}, {960, 1440}});
  w.days.push_back({{0, 660}, {780, 1080}, {1140, 1440}});
  return w;
}

Schedule weekly_schedule(const WeeklyTimetable& timetable, std::int64_t start, double horizon_days) {
  if (timetable.days.size() != 7) throw Error(ErrorCode::kInvalidArgument, "weekly timetable needs 7 days");
  Schedule s;
  s.start = start;
  const auto n = static_cast<std::size_t>(std::llround(horizon_days * kDaySeconds / static_cast<double>(s.sample_period)));
  s.occupied.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::int64_t t = start + static_cast<std::int64_t>(k) * s.sample_period;
    const std::int64_t day = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    const auto weekday = static_cast<std::size_t>(((day + 3) % 7 + 7) % 7);  // 1970-01-01 was a Thursday
    const int minute = static_cast<int>((t - day * 86400) / 60);
    for (const auto& [from, to] : timetable.days[weekday]) {
      if (minute >= from && minute < to) {
        s.occupied[k] = 1;
        break;
      }
    }
  }
  return s;
}

std::vector<double> occupied_durations(const Schedule& schedule) {
  std::vector<double> out;
  const auto& o = schedule.occupied;
  std::size_t k = 0;
  while (k < o.size()) {
    std::size_t j = k;
    while (j < o.size() && o[j] == o[k]) ++j;
    if (o[k] && k > 0 && j < o.size())
      out.push_back(static_cast<double>(j - k) * static_cast<double>(schedule.sample_period) / 60.0);
    k = j;
  }
  return out;
}

SensorSeries simulate(const Schedule& schedule, const ApartmentParams& apt, const SeasonProfile& season,
                      std::uint64_t seed, const std::string& source_id) {
  apt.validate();
  const double dt = static_cast<double>(schedule.sample_period);
  std::mt19937_64 drift_rng(mix_seed(seed, 1)), noise_rng(mix_seed(seed, 2));
  OuProcess temp_drift(season.temp_drift_std, season.drift_time_constant, dt, drift_rng);
  OuProcess rh_drift(season.rh_drift_std, season.drift_time_constant, dt, drift_rng);
  const double gen = apt.generation();
  const double temp_decay = std::exp(-dt / (apt.thermal_time_constant * 3600.0));
  const double rh_decay = std::exp(-dt / (apt.rh_time_constant * 60.0));

  SensorSeries out;
  out.sample_period = schedule.sample_period;
  out.source_id = source_id;
  out.records.reserve(schedule.occupied.size());
  double co2 = apt.outdoor_co2, temp = apt.setpoint_temp, rh = apt.rh_baseline;
  for (std::size_t k = 0; k < schedule.occupied.size(); ++k) {
    const std::int64_t t = schedule.start + static_cast<std::int64_t>(k) * schedule.sample_period;
    const double occ = schedule.occupied[k];
    const double phase = season_phase(t);
    const double ach = apt.ventilation_rate * (1.0 + season.ventilation_amplitude * phase);
    const double k_vent = ach / 3600.0;
    const double co2_target = apt.outdoor_co2 + occ * gen / (apt.volume * k_vent);
    const double temp_target =
        apt.setpoint_temp + season.setpoint_amplitude * phase + temp_drift.step(drift_rng) + apt.occupant_temp_gain * occ;
    const double rh_target = apt.rh_baseline + season.rh_amplitude * phase + rh_drift.step(drift_rng) + apt.rh_occupant_gain * occ;

    // Zero-order hold on occupancy: exact solution of the linear ODEs over dt.
    co2 = co2_target + (co2 - co2_target) * std::exp(-k_vent * dt);
    temp = temp_target + (temp - temp_target) * temp_decay;
    rh = rh_target + (rh - rh_target) * rh_decay;

    SensorRecord r;
    r.timestamp = t;
    r.co2 = std::clamp(co2 + truncated_normal(noise_rng, apt.noise_co2), kCo2Min, kCo2Max);
    r.t_indoor = std::clamp(temp + truncated_normal(noise_rng, apt.noise_temp), kTempMin, kTempMax);
    r.rh = std::clamp(rh + truncated_normal(noise_rng, apt.noise_rh), kRhMin, kRhMax);
    r.occupied = schedule.occupied[k];
    out.records.push_back(r);
  }
  return out;
}

ScenarioOptions scenario_months(double train, double val, double test) {
  ScenarioOptions o;
  const double total = train + val + test;
  o.reference_months = total;
  o.train_fraction = train / total;
  o.val_fraction = val / total;
  return o;
}

ScenarioSet make_scenarios(std::uint64_t seed, const ScenarioOptions& options) {
  ScenarioSet set;

  auto& ref = set.reference;
  ref.name = "scenario0_reference";
  ref.start = kReferenceStart;
  ref.days = std::round(options.reference_months * kDaysPerMonth);
  ref.scheduler.seed = mix_seed(seed, 10);
  ref.noise_seed = mix_seed(seed, 11);
  const double train_days = std::round(ref.days * options.train_fraction);
  const double val_days = std::round(ref.days * options.val_fraction);
  ref.splits.train_end = ref.start + static_cast<std::int64_t>(train_days * kDaySeconds);
  ref.splits.val_end = ref.start + static_cast<std::int64_t>((train_days + val_days) * kDaySeconds);

  auto& dig = set.digital;
  dig.name = "scenario1_digital";
  dig.start = kTransferStart;
  dig.days = options.transfer_days;
  dig.apartment = ref.apartment;
  dig.apartment.noise_co2 = dig.apartment.noise_temp = dig.apartment.noise_rh = 0.0;
  dig.season = ref.season;
  dig.season.temp_drift_std = dig.season.rh_drift_std = 0.0;
  dig.deterministic_schedule = true;
  dig.noise_seed = mix_seed(seed, 20);

  auto& per = set.perturbed;
  per.name = "scenario2_perturbed";
  per.start = kTransferStart;
  per.days = options.transfer_days;
  auto& a = per.apartment;
  a.volume = ref.apartment.volume * 1.3;
  a.co2_gen_per_person = ref.apartment.generation();
  a.ventilation_rate = ref.apartment.ventilation_rate * 0.6;
  a.outdoor_co2 = ref.apartment.outdoor_co2 + 15.0;
  a.thermal_time_constant = ref.apartment.thermal_time_constant * 1.4;
  a.setpoint_temp = ref.apartment.setpoint_temp + 1.0;
  a.occupant_temp_gain = ref.apartment.occupant_temp_gain * 0.7;
  a.rh_baseline = ref.apartment.rh_baseline + 6.0;
  a.rh_occupant_gain = ref.apartment.rh_occupant_gain * 0.7;
  a.rh_time_constant = ref.apartment.rh_time_constant * 1.5;
  a.noise_co2 = ref.apartment.noise_co2 * 1.6;
  a.noise_temp = ref.apartment.noise_temp * 1.6;
  a.noise_rh = ref.apartment.noise_rh * 1.6;
  per.season = ref.season;
  per.scheduler.mean_occupied_duration = 30.0;
  per.scheduler.mean_vacant_duration = 40.0;
  per.scheduler.min_duration = 2.0;
  per.scheduler.diurnal_modulation = 1.0;
  per.scheduler.seed = mix_seed(seed, 30);
  per.noise_seed = mix_seed(seed, 31);
  return set;
}

SensorSeries generate(const ScenarioSpec& spec) {
  const Schedule schedule = spec.deterministic_schedule
                                ? weekly_schedule(WeeklyTimetable::standard(), spec.start, spec.days)
                                : gen_schedule(spec.scheduler, spec.start, spec.days);
  return simulate(schedule, spec.apartment, spec.season, spec.noise_seed, spec.name);
}

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["start"] = s.start;
  j["days"] = s.days;
  const auto& a = s.apartment;
  j["apartment"] = {{"volume", a.volume},
                    {"co2_gen_per_person", a.generation()},
                    {"ventilation_rate", a.ventilation_rate},
                    {"outdoor_co2", a.outdoor_co2},
                    {"thermal_time_constant", a.thermal_time_constant},
                    {"setpoint_temp", a.setpoint_temp},
                    {"occupant_temp_gain", a.occupant_temp_gain},
                    {"rh_baseline", a.rh_baseline},
                    {"rh_occupant_gain", a.rh_occupant_gain},
                    {"rh_time_constant", a.rh_time_constant},
                    {"noise_co2", a.noise_co2},
                    {"noise_temp", a.noise_temp},
                    {"noise_rh", a.noise_rh}};
  const auto& p = s.season;
  j["season"] = {{"setpoint_amplitude", p.setpoint_amplitude},
                 {"rh_amplitude", p.rh_amplitude},
                 {"ventilation_amplitude", p.ventilation_amplitude},
                 {"temp_drift_std", p.temp_drift_std},
                 {"rh_drift_std", p.rh_drift_std},
                 {"drift_time_constant", p.drift_time_constant}};
  const auto& c = s.scheduler;
  j["scheduler"] = {{"mean_occupied_duration", c.mean_occupied_duration},
                    {"mean_vacant_duration", c.mean_vacant_duration},
                    {"min_duration", c.min_duration},
                    {"diurnal_modulation", c.diurnal_modulation},
                    {"seed", c.seed}};
  j["deterministic_schedule"] = s.deterministic_schedule;
  j["noise_seed"] = s.noise_seed;
  j["splits"] = {{"train_end", s.splits.train_end}, {"val_end", s.splits.val_end}};
  return j;
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioSpec s;
    s.name = j.at("name").get<std::string>();
    s.start = j.at("start").get<std::int64_t>();
    s.days = j.at("days").get<double>();
    const auto& a = j.at("apartment");
    auto& ap = s.apartment;
    ap.volume = a.at("volume").get<double>();
    ap.co2_gen_per_person = a.at("co2_gen_per_person").get<double>();
    ap.ventilation_rate = a.at("ventilation_rate").get<double>();
    ap.outdoor_co2 = a.at("outdoor_co2").get<double>();
    ap.thermal_time_constant = a.at("thermal_time_constant").get<double>();
    ap.setpoint_temp = a.at("setpoint_temp").get<double>();
    ap.occupant_temp_gain = a.at("occupant_temp_gain").get<double>();
    ap.rh_baseline = a.at("rh_baseline").get<double>();
    ap.rh_occupant_gain = a.at("rh_occupant_gain").get<double>();
    ap.rh_time_constant = a.at("rh_time_constant").get<double>();
    ap.noise_co2 = a.at("noise_co2").get<double>();
    ap.noise_temp = a.at("noise_temp").get<double>();
    ap.noise_rh = a.at("noise_rh").get<double>();
    const auto& p = j.at("season");
    s.season = {p.at("setpoint_amplitude").get<double>(),    p.at("rh_amplitude").get<double>(),
                p.at("ventilation_amplitude").get<double>(), p.at("temp_drift_std").get<double>(),
                p.at("rh_drift_std").get<double>(),          p.at("drift_time_constant").get<double>()};
    const auto& c = j.at("scheduler");
    s.scheduler.mean_occupied_duration = c.at("mean_occupied_duration").get<double>();
    s.scheduler.mean_vacant_duration = c.at("mean_vacant_duration").get<double>();
    s.scheduler.min_duration = c.at("min_duration").get<double>();
    s.scheduler.diurnal_modulation = c.at("diurnal_modulation").get<double>();
    s.scheduler.seed = c.at("seed").get<std::uint64_t>();
    s.deterministic_schedule = j.at("deterministic_schedule").get<bool>();
    s.noise_seed = j.at("noise_seed").get<std::uint64_t>();
    s.splits.train_end = j.at("splits").at("train_end").get<std::int64_t>();
    s.splits.val_end = j.at("splits").at("val_end").get<std::int64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, fmt::format("bad scenario record: {}", e.what()));
  }
}

}  // namespace occ
