#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blurbench/dataset.hpp"
#include "blurbench/descriptors.hpp"

namespace blurbench {

/// |Q| x |R| similarity scores, higher = more similar.
class SimilarityMatrix {
 public:
  SimilarityMatrix(std::size_t rows, std::size_t cols, std::string metric);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::string& metric() const noexcept { return metric_; }

  double at(std::size_t i, std::size_t j) const { return scores_[i * cols_ + j]; }
  void set(std::size_t i, std::size_t j, double value) { scores_[i * cols_ + j] = value; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> scores_;
  std::string metric_;
};

SimilarityMatrix similarity_matrix(const DescriptorSet& query, const DescriptorSet& reference,
                                   Metric metric);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

/// Points from a descending sweep over the distinct best-match scores.
struct PRCurve {
  std::vector<PrPoint> points;
  std::vector<double> thresholds;
};

struct BestMatch {
  std::size_t reference = 0;
  double score = 0.0;
  bool correct = false;
};

/// Single-best-match protocol: per query take the row argmax (ties to the
/// lowest reference index); at each cutoff t the accepted queries are those
/// with best score >= t, precision = TP/accepted, recall = TP/positives.
PRCurve pr_curve(const SimilarityMatrix& matrix, const GroundTruth& gt);

/// Trapezoidal area under (recall, precision), with a virtual starting point
/// at recall 0 carrying the first precision; clamped to [0, 1].
double auc(const PRCurve& curve);

struct EvalResult {
  double auc = 0.0;
  std::vector<BestMatch> best;
};

EvalResult evaluate(const DescriptorSet& query, const DescriptorSet& reference, Metric metric,
                    const GroundTruth& gt);

// --- result grids (one row per pair x method x deblur variant) ---

struct GridCell {
  std::optional<double> auc;
  std::optional<PRCurve> curve;
  std::string note;  // set when the cell failed or was skipped
};

struct GridRowSpec {
  std::string pair;
  std::string method;
  std::string deblur = "none";
  Metric metric = Metric::Cosine;
  const DescriptorSet* reference = nullptr;
  const GroundTruth* gt = nullptr;
  std::map<int, const DescriptorSet*> query_by_level;
};

struct GridRow {
  std::string pair;
  std::string method;
  std::string deblur;
  std::map<int, GridCell> cells;
  std::optional<double> avg;
  std::optional<double> std_dev;
};

struct GridTable {
  std::vector<int> levels;
  std::vector<GridRow> rows;

  /// CSV with header "pair,method,deblur,L001,...,avg,std", 4 decimals,
  /// empty string for missing cells.
  std::string to_csv() const;
};

/// Evaluates every (row, level) cell; per-cell failures are recorded in the
/// cell note and leave the cell empty rather than aborting the grid.
GridTable evaluate_grid(const std::vector<GridRowSpec>& specs, const std::vector<int>& levels,
                        bool keep_curves = false);

}  // namespace blurbench
