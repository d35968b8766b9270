#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dsm {

// Readings indexed (day, slot, meter).
struct ConsumptionPanel {
  int slot_count = 0;
  int day_count = 0;
  int meter_count = 0;
  std::vector<double> values;
  std::vector<std::string> meter_ids;

  double& at(int day, int slot, int meter) {
    return values[(static_cast<std::size_t>(day) * slot_count + slot) * meter_count + meter];
  }
  double at(int day, int slot, int meter) const {
    return values[(static_cast<std::size_t>(day) * slot_count + slot) * meter_count + meter];
  }
};

struct FormatSpec {
  char separator = ',';
  std::string meter_column = "meter";
  std::string time_column = "time";   // ISO-8601 timestamp or global slot index
  std::string value_column = "kw";
  int slot_count = 48;
  double max_bad_fraction = 0.01;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_malformed = 0;
  std::vector<std::size_t> malformed_lines;
  int days_dropped = 0;
};

ConsumptionPanel ingest_csv(const std::string& path, const FormatSpec& format,
                            IngestReport* report = nullptr);

std::vector<double> estimate_seasonality(const ConsumptionPanel& panel);
std::vector<double> seasonality_std_errors(const ConsumptionPanel& panel);
ConsumptionPanel remove_seasonality(const ConsumptionPanel& panel,
                                    const std::vector<double>& seasonality);

struct VolatilityEstimate {
  double sigma0 = 0.0;
  double sigma = 0.0;
  double total = 0.0;
  bool sigma_available = false;
};

VolatilityEstimate estimate_volatilities(const ConsumptionPanel& panel,
                                         const std::vector<double>& seasonality,
                                         double dt);

struct PriceFit {
  double p0 = 0.0;
  double p1 = 0.0;
  double p0_std_error = 0.0;
  double p1_std_error = 0.0;
};

PriceFit fit_price_curve(const std::vector<std::pair<double, double>>& demand_price);

struct CalibrationResult {
  std::vector<double> seasonality;
  double sigma0_hat = 0.0;
  double sigma_hat = 0.0;
  double sigma_st_hat = 0.0;
  double p0_hat = 0.0;
  double p1_hat = 0.0;
  bool has_price = false;
  std::string price_units;  // declared by the user, never converted
};

// key = value lines readable as scenario overrides.
std::string format_calibration(const CalibrationResult& result);

struct PanelSpec {
  std::vector<double> seasonality;  // kW per slot
  double dt = 0.5;
  double mu = 0.0;
  double sigma0 = 0.31;
  double sigma = 0.56;
  int days = 21;
  int meters = 300;
  std::uint64_t seed = 1;
};

// Synthetic panel: each day runs the common and idiosyncratic walks from 1 and
// scales them by the seasonal curve.
ConsumptionPanel synthesize_panel(const PanelSpec& spec);

}  // namespace dsm
