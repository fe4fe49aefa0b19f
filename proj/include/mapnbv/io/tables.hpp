#pragma once

// Comparison metric and the bundled raw counts of the two published
// comparisons (first-iteration gain vs. the single-agent planner, points at
// termination vs. the multi-agent frontier baseline).

#include <cfenv>
#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mapnbv/errors.hpp"

namespace mapnbv::io {

// Round to `digits` decimals, ties to even.
inline double round_half_even(double x, int digits = 2) {
  const double scale = std::pow(10.0, digits);
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double r = std::nearbyint(x * scale) / scale;
  std::fesetround(saved);
  return r;
}

// Symmetric percent difference, 100 (a - b) / mean(a, b).
inline double improvement(double a, double b) {
  if (!(a >= 0.0 && b >= 0.0)) throw std::invalid_argument("improvement needs non-negative counts");
  if (a + b == 0.0) throw UndefinedMetricError("improvement of two zero counts");
  return 100.0 * (a - b) / ((a + b) / 2.0);
}

struct ComparisonRow {
  std::string label;
  std::string model;
  double points_a{0};
  double points_b{0};
  double improvement_percent{0};  // rounded to 2 decimals
  double printed_percent{0};      // as published; NaN when not from a published table
};

inline ComparisonRow make_row(std::string label, std::string model, double a, double b) {
  return {std::move(label), std::move(model), a, b, round_half_even(improvement(a, b)), std::nan("")};
}

struct TableSummary {
  std::string name;
  std::vector<ComparisonRow> rows;
  double mean_percent{0};       // mean of the unrounded cells, rounded
  double max_cell_error{0};     // |recomputed - printed| over all rows
};

inline const std::string_view kTable1Csv = R"(class,model,map_nbv,pred_nbv,printed_improvement
Airplane,747,11145,8570,26.12
Airplane,A340,6902,5367,25.02
Airplane,C-17,10207,7258,33.77
Airplane,C-130,5201,2559,68.09
Airplane,Fokker 100,9941,6843,36.92
Rocket,Atlas,1644,1468,11.31
Rocket,Maverick,2535,2257,11.60
Rocket,Saturn V,943,941,0.21
Rocket,Sparrow,1294,1098,16.39
Rocket,V2,1093,949,14.10
Tower,Big Ben,2612,1980,27.53
Tower,Church,6281,4589,31.13
Tower,Clock,2531,1971,24.88
Tower,Pylon,2772,2600,6.40
Tower,Silo,4188,3168,27.73
Train,Diesel,3228,3197,0.96
Train,Mountain,4243,4174,1.64
Watercraft,Cruise,3359,1686,66.32
Watercraft,Patrol,3684,3677,0.19
Watercraft,Yacht,10114,7892,24.68
)";

inline const std::string_view kTable2Csv = R"(class,model,map_nbv,ma_baseline,printed_improvement
Airplane,747,11628,10214,12.95
Airplane,A340,9202,8156,12.05
Airplane,C-17,12599,10150,21.53
Airplane,C-130,6311,5961,5.70
Airplane,Fokker 100,15613,13158,17.07
Rocket,Atlas,1879,1747,7.28
Rocket,Maverick,3357,2693,21.95
Rocket,Saturn V,985,877,11.60
Rocket,Sparrow,1797,1664,7.69
Rocket,V2,1255,919,30.91
Tower,Big Ben,3741,3493,6.86
Tower,Church,8004,6890,14.96
Tower,Clock,3139,2382,27.42
Tower,Pylon,3075,2870,6.90
Tower,Silo,5933,4296,32.01
Train,Diesel,3427,3233,5.83
Train,Mountain,4711,4215,11.11
Watercraft,Cruise,4746,3118,41.40
Watercraft,Patrol,3989,3683,7.98
Watercraft,Yacht,11351,10341,9.31
)";

// Five columns: class, model, count a, count b, printed improvement.
inline TableSummary summarize_table(std::string name, std::string_view csv) {
  TableSummary out;
  out.name = std::move(name);
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t lineno = 0;
  double sum = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw ParseError(out.name, lineno, "expected 5 columns");
    ComparisonRow r;
    try {
      r = make_row(f[0], f[1], std::stod(f[2]), std::stod(f[3]));
      r.printed_percent = std::stod(f[4]);
    } catch (const std::logic_error&) {
      throw ParseError(out.name, lineno, "bad number");
    }
    sum += improvement(r.points_a, r.points_b);
    out.max_cell_error = std::max(out.max_cell_error, std::abs(r.improvement_percent - r.printed_percent));
    out.rows.push_back(std::move(r));
  }
  if (out.rows.empty()) throw EmptyInputError("table " + out.name + " has no rows");
  out.mean_percent = round_half_even(sum / static_cast<double>(out.rows.size()));
  return out;
}

inline std::vector<TableSummary> reproduce_tables() {
  return {summarize_table("table1", kTable1Csv), summarize_table("table2", kTable2Csv)};
}

}  // namespace mapnbv::io
