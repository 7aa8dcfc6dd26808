#pragma once

// Prediction files and the evaluation report: classification confusion,
// localisation error statistics, accuracy against SNR and the effect of
// median filtering on streaming estimates.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "sdsp/dataset.hpp"
#include "sdsp/scene.hpp"

namespace sdsp {

/// One line of a prediction file: {"id", "class", "alpha_deg", "valid"}.
/// alpha_deg is null when no estimate was produced.
struct Prediction {
  std::string id;
  SoundClass cls = SoundClass::Other;
  double alpha_deg = 0.0;
  bool valid = false;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Throws FormatError naming the line on malformed input.
std::vector<Prediction> parse_predictions(const std::string& text);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);
std::string serialize_predictions(const std::vector<Prediction>& preds);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds);

inline constexpr double kHistogramBinDeg = 2.5;
inline constexpr std::size_t kHistogramBins = 72;  // covers [0, 180]
inline constexpr double kSnrBucketDb = 5.0;

struct SnrBucket {
  double lo_db = 0.0;  // bucket is [lo_db, lo_db + 5)
  std::size_t count = 0;
  /// Per-class accuracy (NaN when the class is absent) and their mean over
  /// present classes.
  std::array<double, kNumClasses> class_accuracy{};
  double accuracy = 0.0;
};

struct EvalReport {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};
  /// Row-normalised counts (rows = true class); rows without support are 0.
  std::array<std::array<double, kNumClasses>, kNumClasses> confusion{};
  double accuracy = 0.0;  // mean of the supported diagonal entries
  /// Median |alpha - alpha_hat| over valid estimates on Siren / Horn / both
  /// true classes. NaN without data.
  double median_error_siren = 0.0;
  double median_error_horn = 0.0;
  double median_error_all = 0.0;
  double mean_error_all = 0.0;
  /// Normalised histogram of absolute errors, 2.5 degree bins over [0, 180].
  std::vector<double> error_histogram;
  std::vector<SnrBucket> accuracy_vs_snr;
  std::size_t n_records = 0;
  std::size_t n_localised = 0;
  /// Alerting ground-truth records without a valid estimate.
  std::size_t n_invalid = 0;
};

/// Predictions must cover exactly the manifest's record ids (no duplicates,
/// no extras); otherwise ValidationError.
EvalReport evaluate(const std::vector<Prediction>& preds, const Manifest& truth);

std::string report_to_json(const EvalReport& report);
std::string accuracy_vs_snr_csv(const EvalReport& report);
std::string error_histogram_csv(const EvalReport& report);

struct OrderError {
  int order = 1;
  double median_error = 0.0;
  double mean_error = 0.0;
  std::size_t count = 0;
};

/// Median-filters each scene's estimates in frame order at every requested
/// order and reports the pooled errors on alerting records.
std::vector<OrderError> error_vs_median_order(const std::vector<Prediction>& preds, const Manifest& truth,
                                              const std::vector<int>& orders);
std::string order_errors_csv(const std::vector<OrderError>& rows);

/// Applies a median filter of `order` to each scene's valid estimates.
std::vector<Prediction> median_filter_predictions(const std::vector<Prediction>& preds, const Manifest& truth,
                                                  int order);

double median(std::vector<double> values);

}  // namespace sdsp
