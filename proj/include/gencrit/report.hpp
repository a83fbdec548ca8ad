#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gencrit {

/// One metrics CSV row. The column set is fixed; writers emit them in the
/// order listed here and readers reject anything else.
struct MetricsRow {
    int step = 0;
    std::string mode;
    std::string data_mode;
    std::string reward_variant;
    std::uint64_t seed = 0;
    double mean_R_r = 0.0;
    double ema_E_Rr = 0.0;
    double mean_R_c = 0.0;
    double gen_acc = 0.0;
    double crit_acc = 0.0;
    double p1 = 0.0;
    double p2 = 0.0;
    double precision_correct = 0.0;
    double recall_correct = 0.0;
    double clip_frac = 0.0;
    double kl = 0.0;
};

namespace report {

/// Shortest round-trip decimal form; the same double always formats to the
/// same bytes, which the determinism guarantee leans on.
std::string format_double(double value);

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace report

/// Newline-delimited JSON event log. Disabled when constructed without a
/// path, so call sites never need to branch.
class JsonlLogger {
  public:
    JsonlLogger() = default;
    explicit JsonlLogger(const std::string& path);

    bool enabled() const { return out_.is_open(); }
    void log(const nlohmann::json& event);

  private:
    std::ofstream out_;
};

}  // namespace gencrit
