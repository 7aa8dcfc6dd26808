#include "sdsp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "sdsp/doa.hpp"
#include "sdsp/errors.hpp"

namespace sdsp {
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::unordered_map<std::string, const Prediction*> index_predictions(const std::vector<Prediction>& preds,
                                                                     const Manifest& truth) {
  std::unordered_map<std::string, const Prediction*> by_id;
  for (const auto& p : preds)
    if (!by_id.emplace(p.id, &p).second) throw ValidationError("duplicate prediction id '" + p.id + "'");
  for (const auto& r : truth.records)
    if (!by_id.count(r.id)) throw ValidationError("no prediction for record '" + r.id + "'");
  if (by_id.size() != truth.records.size()) {
    for (const auto& p : preds)
      if (!truth.find(p.id)) throw ValidationError("prediction id '" + p.id + "' is not in the manifest");
  }
  return by_id;
}

double abs_error(double a, double b) { return std::abs(a - b); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

std::vector<Prediction> parse_predictions(const std::string& text) {
  std::vector<Prediction> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Prediction p;
      p.id = j.at("id").get<std::string>();
      p.cls = parse_sound_class(j.at("class").get<std::string>());
      p.valid = j.at("valid").get<bool>();
      const auto& a = j.at("alpha_deg");
      if (a.is_null()) {
        if (p.valid) throw ValidationError("valid prediction without alpha_deg");
      } else {
        p.alpha_deg = a.get<double>();
      }
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw FormatError("predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str());
}

std::string serialize_predictions(const std::vector<Prediction>& preds) {
  std::string out;
  for (const auto& p : preds) {
    const json j = {{"id", p.id},
                    {"class", to_string(p.cls)},
                    {"alpha_deg", p.valid ? json(p.alpha_deg) : json(nullptr)},
                    {"valid", p.valid}};
    out += j.dump() + "\n";
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << serialize_predictions(preds);
}

EvalReport evaluate(const std::vector<Prediction>& preds, const Manifest& truth) {
  const auto by_id = index_predictions(preds, truth);
  EvalReport rep;
  rep.n_records = truth.records.size();

  std::vector<double> err_siren, err_horn, err_all;
  struct BucketAcc {
    std::array<std::size_t, kNumClasses> total{}, correct{};
  };
  std::map<long, BucketAcc> buckets;

  for (const auto& r : truth.records) {
    const Prediction& p = *by_id.at(r.id);
    const auto t = static_cast<std::size_t>(r.cls);
    const auto q = static_cast<std::size_t>(p.cls);
    ++rep.counts[t][q];
    auto& b = buckets[static_cast<long>(std::floor(r.snr_db / kSnrBucketDb))];
    ++b.total[t];
    if (t == q) ++b.correct[t];

    if (!is_alerting(r.cls)) continue;
    if (!p.valid) {
      ++rep.n_invalid;
      continue;
    }
    const double e = abs_error(p.alpha_deg, r.alpha_deg);
    (r.cls == SoundClass::Siren ? err_siren : err_horn).push_back(e);
    err_all.push_back(e);
  }

  std::size_t supported = 0;
  double diag = 0.0;
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    std::size_t row = 0;
    for (std::size_t q = 0; q < kNumClasses; ++q) row += rep.counts[t][q];
    if (row == 0) continue;
    for (std::size_t q = 0; q < kNumClasses; ++q)
      rep.confusion[t][q] = static_cast<double>(rep.counts[t][q]) / static_cast<double>(row);
    ++supported;
    diag += rep.confusion[t][t];
  }
  rep.accuracy = supported ? diag / static_cast<double>(supported) : kNaN;

  rep.n_localised = err_all.size();
  rep.median_error_siren = median(err_siren);
  rep.median_error_horn = median(err_horn);
  rep.median_error_all = median(err_all);
  rep.mean_error_all = kNaN;
  if (!err_all.empty()) {
    double s = 0.0;
    for (double e : err_all) s += e;
    rep.mean_error_all = s / static_cast<double>(err_all.size());
  }

  rep.error_histogram.assign(kHistogramBins, 0.0);
  for (double e : err_all) {
    const auto bin = std::min(kHistogramBins - 1, static_cast<std::size_t>(e / kHistogramBinDeg));
    rep.error_histogram[bin] += 1.0;
  }
  if (!err_all.empty())
    for (double& h : rep.error_histogram) h /= static_cast<double>(err_all.size());

  for (const auto& [key, b] : buckets) {
    SnrBucket sb;
    sb.lo_db = static_cast<double>(key) * kSnrBucketDb;
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      sb.count += b.total[c];
      if (b.total[c] == 0) {
        sb.class_accuracy[c] = kNaN;
        continue;
      }
      sb.class_accuracy[c] = static_cast<double>(b.correct[c]) / static_cast<double>(b.total[c]);
      sum += sb.class_accuracy[c];
      ++present;
    }
    sb.accuracy = sum / static_cast<double>(present);
    rep.accuracy_vs_snr.push_back(sb);
  }
  return rep;
}

std::string report_to_json(const EvalReport& rep) {
  json conf = json::array(), counts = json::array();
  for (std::size_t t = 0; t < kNumClasses; ++t) {
    conf.push_back(json(std::vector<double>(rep.confusion[t].begin(), rep.confusion[t].end())));
    counts.push_back(json(std::vector<std::size_t>(rep.counts[t].begin(), rep.counts[t].end())));
  }
  json snr = json::array();
  for (const auto& b : rep.accuracy_vs_snr) {
    json per = json::object();
    for (std::size_t c = 0; c < kNumClasses; ++c)
      per[to_string(static_cast<SoundClass>(c))] = number_or_null(b.class_accuracy[c]);
    snr.push_back({{"snr_lo_db", b.lo_db}, {"count", b.count}, {"accuracy", b.accuracy}, {"per_class", per}});
  }
  const json j = {
      {"classes", {"siren", "horn", "other"}},
      {"confusion", conf},
      {"counts", counts},
      {"accuracy", number_or_null(rep.accuracy)},
      {"median_abs_error_deg",
       {{"siren", number_or_null(rep.median_error_siren)},
        {"horn", number_or_null(rep.median_error_horn)},
        {"all", number_or_null(rep.median_error_all)}}},
      {"mean_abs_error_deg", number_or_null(rep.mean_error_all)},
      {"error_histogram", {{"bin_width_deg", kHistogramBinDeg}, {"density", rep.error_histogram}}},
      {"accuracy_vs_snr", snr},
      {"n_records", rep.n_records},
      {"n_localised", rep.n_localised},
      {"n_invalid", rep.n_invalid}};
  return j.dump(1) + "\n";
}

std::string accuracy_vs_snr_csv(const EvalReport& rep) {
  std::string out = "snr_lo_db,snr_hi_db,count,accuracy,siren,horn,other\n";
  for (const auto& b : rep.accuracy_vs_snr) {
    out += csv_number(b.lo_db) + "," + csv_number(b.lo_db + kSnrBucketDb) + "," + std::to_string(b.count) + "," +
           csv_number(b.accuracy);
    for (double a : b.class_accuracy) out += "," + csv_number(a);
    out += "\n";
  }
  return out;
}

std::string error_histogram_csv(const EvalReport& rep) {
  std::string out = "error_lo_deg,error_hi_deg,density\n";
  for (std::size_t i = 0; i < rep.error_histogram.size(); ++i) {
    const double lo = static_cast<double>(i) * kHistogramBinDeg;
    out += csv_number(lo) + "," + csv_number(lo + kHistogramBinDeg) + "," + csv_number(rep.error_histogram[i]) + "\n";
  }
  return out;
}

std::vector<Prediction> median_filter_predictions(const std::vector<Prediction>& preds, const Manifest& truth,
                                                  int order) {
  const auto by_id = index_predictions(preds, truth);
  // Records grouped by scene in frame order.
  std::map<std::size_t, std::vector<const FrameRecord*>> scenes;
  for (const auto& r : truth.records) scenes[r.scene].push_back(&r);

  std::unordered_map<std::string, Prediction> filtered;
  for (auto& [scene, recs] : scenes) {
    std::sort(recs.begin(), recs.end(), [](const FrameRecord* a, const FrameRecord* b) { return a->frame < b->frame; });
    std::vector<DoAEstimate> est;
    for (const auto* r : recs) {
      const Prediction& p = *by_id.at(r->id);
      est.push_back({p.alpha_deg, r->frame, p.valid});
    }
    est = median_filter_estimates(est, order);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      Prediction p = *by_id.at(recs[i]->id);
      p.alpha_deg = est[i].alpha_deg;
      filtered.emplace(p.id, p);
    }
  }
  std::vector<Prediction> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back(filtered.at(p.id));
  return out;
}

std::vector<OrderError> error_vs_median_order(const std::vector<Prediction>& preds, const Manifest& truth,
                                              const std::vector<int>& orders) {
  std::vector<OrderError> rows;
  for (int order : orders) {
    const auto filtered = median_filter_predictions(preds, truth, order);
    std::unordered_map<std::string, const Prediction*> by_id;
    for (const auto& p : filtered) by_id.emplace(p.id, &p);
    std::vector<double> errs;
    for (const auto& r : truth.records) {
      const Prediction& p = *by_id.at(r.id);
      if (is_alerting(r.cls) && p.valid) errs.push_back(abs_error(p.alpha_deg, r.alpha_deg));
    }
    OrderError row{order, median(errs), kNaN, errs.size()};
    if (!errs.empty()) {
      double s = 0.0;
      for (double e : errs) s += e;
      row.mean_error = s / static_cast<double>(errs.size());
    }
    rows.push_back(row);
  }
  return rows;
}

std::string order_errors_csv(const std::vector<OrderError>& rows) {
  std::string out = "order,median_abs_error_deg,mean_abs_error_deg,count\n";
  for (const auto& r : rows)
    out += std::to_string(r.order) + "," + csv_number(r.median_error) + "," + csv_number(r.mean_error) + "," +
           std::to_string(r.count) + "\n";
  return out;
}

}  // namespace sdsp
