#include "s2cgan/metrics.hpp"

#include <cstdio>

#include "s2cgan/error.hpp"

namespace s2cgan {

ConfusionCounts confusion(const BinaryMask& predicted, const BinaryMask& reference) {
  if (predicted.height != reference.height || predicted.width != reference.width ||
      predicted.values.size() != reference.values.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "prediction is " + std::to_string(predicted.height) + "x" + std::to_string(predicted.width) +
                    ", reference is " + std::to_string(reference.height) + "x" +
                    std::to_string(reference.width));
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.values.size(); ++i) {
    const std::uint8_t p = predicted.values[i];
    const std::uint8_t r = reference.values[i];
    if (p > 1 || r > 1) throw Error(ErrorCode::kNonBinaryInput, "mask values must be 0 or 1");
    if (p && r) ++c.tp;
    else if (!p && !r) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  return c;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

}  // namespace

MetricsReport report(const ConfusionCounts& counts) {
  MetricsReport r;
  r.counts = counts;
  r.oa = ratio(counts.tp + counts.tn, counts.total());
  r.spc = ratio(counts.tn, counts.tn + counts.fp);
  r.sen = ratio(counts.tp, counts.tp + counts.fn);
  if (r.oa) r.err = error_rate(*r.oa);
  return r;
}

nlohmann::json to_json(const MetricsReport& r) {
  return {{"oa", optional_json(r.oa)},   {"spc", optional_json(r.spc)}, {"sen", optional_json(r.sen)},
          {"err", optional_json(r.err)}, {"tp", r.counts.tp},          {"tn", r.counts.tn},
          {"fp", r.counts.fp},           {"fn", r.counts.fn}};
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.oa = optional_from(j.at("oa"));
  r.spc = optional_from(j.at("spc"));
  r.sen = optional_from(j.at("sen"));
  r.err = optional_from(j.at("err"));
  r.counts = {j.at("tp").get<std::uint64_t>(), j.at("tn").get<std::uint64_t>(),
              j.at("fp").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>()};
  return r;
}

std::string format_table(const MetricsReport& r, const std::string& label) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s\n", "Method", "OA", "SPC", "SEN", "ERR");
  out += line;
  std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s\n", label.c_str(), cell(r.oa).c_str(),
                cell(r.spc).c_str(), cell(r.sen).c_str(), cell(r.err).c_str());
  out += line;
  return out;
}

}  // namespace s2cgan
