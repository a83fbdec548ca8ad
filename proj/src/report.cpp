#include "gencrit/report.hpp"

#include <charconv>
#include <sstream>

#include "gencrit/errors.hpp"

namespace gencrit {
namespace report {

namespace {

constexpr const char* kColumns[] = {
    "step", "mode", "data_mode", "reward_variant", "seed",
    "mean_R_r", "ema_E_Rr", "mean_R_c", "gen_acc", "crit_acc",
    "p1", "p2", "precision_correct", "recall_correct", "clip_frac", "kl",
};
constexpr std::size_t kNumColumns = sizeof(kColumns) / sizeof(kColumns[0]);

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

template <typename T>
T parse_field(const std::string& text, const std::string& column) {
    T value{};
    const auto* begin = text.data();
    const auto* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw DataError("metrics CSV: bad value '" + text + "' in column " + column);
    return value;
}

double parse_double(const std::string& text, const std::string& column) {
    return parse_field<double>(text, column);
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) throw NumericError("failed to format double");
    return std::string(buffer, ptr);
}

std::string metrics_header() {
    std::string header;
    for (std::size_t i = 0; i < kNumColumns; ++i) {
        if (i > 0) header += ',';
        header += kColumns[i];
    }
    return header;
}

std::string format_metrics_row(const MetricsRow& row) {
    std::string line;
    line += std::to_string(row.step);
    line += ',';
    line += row.mode;
    line += ',';
    line += row.data_mode;
    line += ',';
    line += row.reward_variant;
    line += ',';
    line += std::to_string(row.seed);
    for (double value : {row.mean_R_r, row.ema_E_Rr, row.mean_R_c, row.gen_acc, row.crit_acc,
                         row.p1, row.p2, row.precision_correct, row.recall_correct,
                         row.clip_frac, row.kl}) {
        line += ',';
        line += format_double(value);
    }
    return line;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path, std::ios::binary);  // binary keeps \n stable across platforms
    if (!out) throw DataError("cannot open metrics CSV for writing: " + path);
    out << metrics_header() << '\n';
    for (const MetricsRow& row : rows) out << format_metrics_row(row) << '\n';
    if (!out) throw DataError("failed writing metrics CSV: " + path);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open metrics CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("metrics CSV is empty: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != metrics_header())
        throw DataError("metrics CSV has unexpected header: " + path);

    std::vector<MetricsRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_line(line);
        if (fields.size() != kNumColumns)
            throw DataError("metrics CSV line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(kNumColumns));
        MetricsRow row;
        row.step = parse_field<int>(fields[0], "step");
        row.mode = fields[1];
        row.data_mode = fields[2];
        row.reward_variant = fields[3];
        row.seed = parse_field<std::uint64_t>(fields[4], "seed");
        row.mean_R_r = parse_double(fields[5], "mean_R_r");
        row.ema_E_Rr = parse_double(fields[6], "ema_E_Rr");
        row.mean_R_c = parse_double(fields[7], "mean_R_c");
        row.gen_acc = parse_double(fields[8], "gen_acc");
        row.crit_acc = parse_double(fields[9], "crit_acc");
        row.p1 = parse_double(fields[10], "p1");
        row.p2 = parse_double(fields[11], "p2");
        row.precision_correct = parse_double(fields[12], "precision_correct");
        row.recall_correct = parse_double(fields[13], "recall_correct");
        row.clip_frac = parse_double(fields[14], "clip_frac");
        row.kl = parse_double(fields[15], "kl");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace report

JsonlLogger::JsonlLogger(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open JSONL log for writing: " + path);
}

void JsonlLogger::log(const nlohmann::json& event) {
    if (!out_.is_open()) return;
    out_ << event.dump() << '\n';
}

}  // namespace gencrit
