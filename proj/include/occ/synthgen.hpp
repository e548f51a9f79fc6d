// Copyright 2026 The occdetect Authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

// Synthetic single-zone apartment: a semi-Markov occupancy schedule drives
// first-order CO2, temperature and humidity responses sampled every 30 s.

#ifndef OCC_SYNTHGEN_HPP
#define OCC_SYNTHGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "occ/dataset.hpp"

namespace occ {

struct ApartmentParams {
  double volume = 55.0;                  // m^3
  double co2_gen_per_person = 0.0;       // ppm m^3 / s; 0 selects the 900 ppm default
  double ventilation_rate = 0.7;         // air changes per hour
  double outdoor_co2 = 420.0;            // ppm
  double thermal_time_constant = 3.0;    // hours
  double setpoint_temp = 21.5;           // degC
  double occupant_temp_gain = 0.6;       // degC at steady state
  double rh_baseline = 38.0;             // %
  double rh_occupant_gain = 6.0;         // % at steady state
  double rh_time_constant = 6.0;         // minutes
  double noise_co2 = 20.0;               // ppm
  double noise_temp = 0.1;               // degC
  double noise_rh = 0.8;                 // %

  // Source strength that puts the one-occupant steady state at `target` ppm.
  static double generation_for(double target, double outdoor, double volume, double ach);
  double generation() const;
  double steady_state_co2(int occupants) const;
  void validate() const;
};

// Seasonal and weather modulation. All zeros gives time-invariant physics.
struct SeasonProfile {
  double setpoint_amplitude = 1.0;     // degC, warmest at midsummer
  double rh_amplitude = 8.0;           // %, most humid at midsummer
  double ventilation_amplitude = 0.15; // relative, strongest at midsummer
  double temp_drift_std = 0.4;         // degC, stationary std of the OU drift
  double rh_drift_std = 3.0;           // %
  double drift_time_constant = 18.0;   // hours

  static SeasonProfile none() { return {0.0, 0.0, 0.0, 0.0, 0.0, 18.0}; }
};

struct SchedulerParams {
  double mean_occupied_duration = 45.0;  // minutes, before diurnal scaling
  double mean_vacant_duration = 35.0;    // minutes
  double min_duration = 3.0;             // minutes added to every sojourn
  double diurnal_modulation = 1.4;       // log-scale swing of the sojourn means
  std::uint64_t seed = 0;

  void validate() const;
};

// Presence bias in [-1, 1] by hour of day: +1 at night, -1 at midday.
double diurnal_bias(double hour_of_day);

struct Schedule {
  std::int64_t start = 0;  // epoch seconds of sample 0
  std::int64_t sample_period = kSamplePeriod;
  std::vector<std::uint8_t> occupied;
};

Schedule gen_schedule(const SchedulerParams& params, std::int64_t start, double horizon_days);

// Repeating weekly timetable, given per day as [from, to) occupied intervals
// in minutes after midnight.
struct WeeklyTimetable {
  std::vector<std::vector<std::pair<int, int>>> days;  // 7 entries, Monday first
  static WeeklyTimetable standard();
};

Schedule weekly_schedule(const WeeklyTimetable& timetable, std::int64_t start, double horizon_days);

// Lengths in minutes of every complete occupied run.
std::vector<double> occupied_durations(const Schedule& schedule);

SensorSeries simulate(const Schedule& schedule, const ApartmentParams& apt, const SeasonProfile& season,
                      std::uint64_t seed, const std::string& source_id = "synthetic");

struct ScenarioSpec {
  std::string name;
  std::int64_t start = 0;
  double days = 90.0;
  ApartmentParams apartment;
  SeasonProfile season;
  SchedulerParams scheduler;
  bool deterministic_schedule = false;
  std::uint64_t noise_seed = 0;
  SplitSpec splits;  // zero when the scenario is evaluation-only
};

struct ScenarioSet {
  ScenarioSpec reference;  // Scenario 0
  ScenarioSpec digital;    // Scenario 1
  ScenarioSpec perturbed;  // Scenario 2
};

struct ScenarioOptions {
  double reference_months = 18.0;
  double train_fraction = 16.5 / 25.0;
  double val_fraction = 5.0 / 25.0;
  double transfer_days = 91.0;
};

// Explicit month counts for the reference split, e.g. 6/2/2.
ScenarioOptions scenario_months(double train, double val, double test);

ScenarioSet make_scenarios(std::uint64_t seed, const ScenarioOptions& options = {});
SensorSeries generate(const ScenarioSpec& spec);

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

}  // namespace occ

#endif  // OCC_SYNTHGEN_HPP
