#include "tcof/report.hpp"

#include "tcof/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace tcof {
namespace {

std::string percent(double value) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << value;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
T parse_cell(const std::string& cell, const std::filesystem::path& path) {
  T value{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError(path.string() + ": invalid number '" + cell + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

void write_accuracy_csv(std::ostream& out, const EvalReport& report) {
  out << "category,accuracy_percent\n";
  for (std::size_t c = 0; c < report.class_names.size(); ++c) {
    out << report.class_names[c] << ',' << percent(report.per_category_accuracy[c]) << '\n';
  }
  out << "overall," << percent(report.overall_accuracy) << '\n';
}

void write_confusion_csv(std::ostream& out, const EvalReport& report) {
  for (const auto& name : report.class_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
    out << report.class_names[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < report.confusion.cols(); ++c) out << ',' << report.confusion(r, c);
    out << '\n';
  }
}

std::filesystem::path confusion_path(const std::filesystem::path& report_path) {
  auto p = report_path;
  p.replace_extension();
  p += ".confusion.csv";
  return p;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  auto write = [](const std::filesystem::path& p, auto&& body) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    body(out);
    if (!out) throw IoError("failed writing " + p.string());
  };
  write(path, [&](std::ostream& os) { write_accuracy_csv(os, report); });
  write(confusion_path(path), [&](std::ostream& os) { write_confusion_csv(os, report); });
}

AccuracyTable read_accuracy_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != "category,accuracy_percent") {
    throw FormatError(path.string() + ": missing 'category,accuracy_percent' header");
  }
  AccuracyTable table;
  bool have_overall = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    if (cells.size() != 2) throw FormatError(path.string() + ": malformed row '" + lines[i] + "'");
    const double value = parse_cell<double>(cells[1], path);
    if (cells[0] == "overall") {
      table.overall = value;
      have_overall = true;
    } else {
      table.categories.emplace_back(cells[0], value);
    }
  }
  if (!have_overall) throw FormatError(path.string() + ": missing overall row");
  return table;
}

ConfusionTable read_confusion_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty confusion file");
  ConfusionTable table;
  auto header = split_csv(lines.front());
  if (header.empty() || !header.front().empty()) throw FormatError(path.string() + ": malformed header");
  table.class_names.assign(header.begin() + 1, header.end());
  const auto k = static_cast<Eigen::Index>(table.class_names.size());
  if (static_cast<Eigen::Index>(lines.size()) != k + 1) throw FormatError(path.string() + ": row count mismatch");
  table.counts.resize(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto cells = split_csv(lines[static_cast<std::size_t>(r + 1)]);
    if (static_cast<Eigen::Index>(cells.size()) != k + 1) throw FormatError(path.string() + ": malformed row");
    for (Eigen::Index c = 0; c < k; ++c) table.counts(r, c) = parse_cell<int>(cells[static_cast<std::size_t>(c + 1)], path);
  }
  return table;
}

void print_accuracy_tables(std::ostream& out, const std::vector<std::filesystem::path>& paths) {
  std::vector<AccuracyTable> tables;
  std::vector<std::string> categories;
  for (const auto& p : paths) {
    tables.push_back(read_accuracy_csv(p));
    for (const auto& [name, value] : tables.back().categories) {
      if (std::find(categories.begin(), categories.end(), name) == categories.end()) categories.push_back(name);
    }
  }
  std::size_t first_width = std::string("overall").size();
  for (const auto& c : categories) first_width = std::max(first_width, c.size());
  std::vector<std::size_t> widths;
  for (const auto& p : paths) widths.push_back(std::max<std::size_t>(8, p.stem().string().size()));

  out << std::left << std::setw(static_cast<int>(first_width)) << "category";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    out << "  " << std::right << std::setw(static_cast<int>(widths[i])) << paths[i].stem().string();
  }
  out << '\n';
  auto row = [&](const std::string& name, auto&& value_of) {
    out << std::left << std::setw(static_cast<int>(first_width)) << name;
    for (std::size_t i = 0; i < tables.size(); ++i) out << "  " << std::right << std::setw(static_cast<int>(widths[i])) << value_of(tables[i]);
    out << '\n';
  };
  for (const auto& name : categories) {
    row(name, [&](const AccuracyTable& t) -> std::string {
      for (const auto& [n, v] : t.categories) {
        if (n == name) return percent(v);
      }
      return "-";
    });
  }
  row("overall", [](const AccuracyTable& t) { return percent(t.overall); });
}

}  // namespace tcof
