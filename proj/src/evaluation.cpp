#include "blurbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace blurbench {

SimilarityMatrix::SimilarityMatrix(std::size_t rows, std::size_t cols, std::string metric)
    : rows_(rows), cols_(cols), scores_(rows * cols, 0.0), metric_(std::move(metric)) {
  if (rows_ == 0 || cols_ == 0) {
    raise(Errc::BadArgument, "similarity matrix must have at least one row and column");
  }
}

SimilarityMatrix similarity_matrix(const DescriptorSet& query, const DescriptorSet& reference,
                                   Metric metric) {
  validate_set(query);
  validate_set(reference);
  if (query.dim != reference.dim) {
    raise(Errc::BadDimensions, "query dim " + std::to_string(query.dim) +
                                   " != reference dim " + std::to_string(reference.dim));
  }
  SimilarityMatrix m(query.size(), reference.size(), to_string(metric));
  for (std::size_t i = 0; i < query.size(); ++i) {
    for (std::size_t j = 0; j < reference.size(); ++j) {
      m.set(i, j, similarity(query.items[i], reference.items[j], metric));
    }
  }
  return m;
}

namespace {

std::vector<BestMatch> best_matches(const SimilarityMatrix& matrix, const GroundTruth& gt) {
  std::vector<BestMatch> best(matrix.rows());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    std::size_t arg = 0;
    double top = matrix.at(i, 0);
    for (std::size_t j = 1; j < matrix.cols(); ++j) {
      if (matrix.at(i, j) > top) {  // ties keep the lowest index
        top = matrix.at(i, j);
        arg = j;
      }
    }
    best[i] = {arg, top, gt.contains(i, static_cast<int>(arg))};
  }
  return best;
}

}  // namespace

PRCurve pr_curve(const SimilarityMatrix& matrix, const GroundTruth& gt) {
  if (gt.query_count() != matrix.rows()) {
    raise(Errc::BadGroundTruth, "ground truth covers " + std::to_string(gt.query_count()) +
                                    " queries, matrix has " + std::to_string(matrix.rows()) +
                                    " rows");
  }
  if (gt.max_reference() >= static_cast<int>(matrix.cols())) {
    raise(Errc::BadGroundTruth, "ground truth references a column beyond the matrix");
  }
  const std::size_t positives = gt.positive_count();
  if (positives == 0) {
    raise(Errc::NoGroundTruth, "no query has a correct reference");
  }

  const std::vector<BestMatch> best = best_matches(matrix, gt);

  // Descending sweep: sort queries by best score, emit one point per
  // distinct score once every query at that score is accepted.
  std::vector<std::size_t> order(best.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return best[a].score > best[b].score;
  });

  PRCurve curve;
  std::size_t accepted = 0;
  std::size_t true_positives = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    ++accepted;
    if (best[order[k]].correct) {
      ++true_positives;
    }
    const bool last_of_score =
        k + 1 == order.size() || best[order[k + 1]].score < best[order[k]].score;
    if (last_of_score) {
      curve.thresholds.push_back(best[order[k]].score);
      curve.points.push_back({static_cast<double>(true_positives) / positives,
                              static_cast<double>(true_positives) / accepted});
    }
  }
  return curve;
}

double auc(const PRCurve& curve) {
  if (curve.points.empty()) {
    raise(Errc::EmptyCurve, "cannot integrate an empty curve");
  }
  double area = 0.0;
  double prev_recall = 0.0;
  double prev_precision = curve.points.front().precision;  // virtual (0, P_first)
  for (const auto& point : curve.points) {
    area += (point.recall - prev_recall) * (point.precision + prev_precision) / 2.0;
    prev_recall = point.recall;
    prev_precision = point.precision;
  }
  return std::clamp(area, 0.0, 1.0);
}

EvalResult evaluate(const DescriptorSet& query, const DescriptorSet& reference, Metric metric,
                    const GroundTruth& gt) {
  const SimilarityMatrix m = similarity_matrix(query, reference, metric);
  EvalResult result;
  result.best = best_matches(m, gt);
  result.auc = auc(pr_curve(m, gt));
  return result;
}

namespace {

std::string format_cell(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

std::string GridTable::to_csv() const {
  std::ostringstream out;
  out << "pair,method,deblur";
  for (int level : levels) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "L%03d", level);
    out << ',' << buf;
  }
  out << ",avg,std\n";
  for (const auto& row : rows) {
    out << row.pair << ',' << row.method << ',' << row.deblur;
    for (int level : levels) {
      out << ',';
      auto it = row.cells.find(level);
      if (it != row.cells.end() && it->second.auc) {
        out << format_cell(*it->second.auc);
      }
    }
    out << ',' << (row.avg ? format_cell(*row.avg) : "");
    out << ',' << (row.std_dev ? format_cell(*row.std_dev) : "");
    out << '\n';
  }
  return out.str();
}

GridTable evaluate_grid(const std::vector<GridRowSpec>& specs, const std::vector<int>& levels,
                        bool keep_curves) {
  GridTable table;
  table.levels = levels;
  for (const auto& spec : specs) {
    GridRow row;
    row.pair = spec.pair;
    row.method = spec.method;
    row.deblur = spec.deblur;

    std::vector<double> scores;
    for (int level : levels) {
      GridCell cell;
      auto it = spec.query_by_level.find(level);
      if (it == spec.query_by_level.end() || it->second == nullptr) {
        cell.note = "missing";
      } else if (spec.reference == nullptr || spec.gt == nullptr) {
        cell.note = "missing reference or ground truth";
      } else {
        try {
          const SimilarityMatrix m = similarity_matrix(*it->second, *spec.reference, spec.metric);
          PRCurve curve = pr_curve(m, *spec.gt);
          cell.auc = auc(curve);
          if (keep_curves) {
            cell.curve = std::move(curve);
          }
          scores.push_back(*cell.auc);
        } catch (const Error& e) {
          cell.note = e.what();
        }
      }
      row.cells.emplace(level, std::move(cell));
    }

    if (!scores.empty()) {
      const double mean =
          std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
      double var = 0.0;
      for (double s : scores) {
        var += (s - mean) * (s - mean);
      }
      var /= static_cast<double>(scores.size());  // population
      row.avg = mean;
      row.std_dev = std::sqrt(var);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace blurbench
