#pragma once

#include "tcof/classify.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace tcof {

// Accuracy CSV:
//   category,accuracy_percent
//   <class>,<pct>          one row per class
//   overall,<pct>
// Confusion CSV (rows = truth, columns = prediction):
//   ,<class 0>,<class 1>,...
//   <class 0>,<count>,...
// Percentages carry two decimals.
void write_accuracy_csv(std::ostream& out, const EvalReport& report);
void write_confusion_csv(std::ostream& out, const EvalReport& report);

// "<dir>/<stem>.confusion.csv" for an accuracy CSV at "<dir>/<stem>.csv".
std::filesystem::path confusion_path(const std::filesystem::path& report_path);

// Writes the accuracy CSV to `path` and the confusion CSV beside it.
void write_report(const EvalReport& report, const std::filesystem::path& path);

struct AccuracyTable {
  std::vector<std::pair<std::string, double>> categories;
  double overall = 0.0;
};

AccuracyTable read_accuracy_csv(const std::filesystem::path& path);

struct ConfusionTable {
  std::vector<std::string> class_names;
  Eigen::MatrixXi counts;
};

ConfusionTable read_confusion_csv(const std::filesystem::path& path);

// Side-by-side category-wise table of several accuracy CSVs, one column per file.
void print_accuracy_tables(std::ostream& out, const std::vector<std::filesystem::path>& paths);

}  // namespace tcof
