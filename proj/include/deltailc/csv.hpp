#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace deltailc {

/// Comma separated writer with a header row. Numbers use the classic locale
/// and round-trip precision.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<double>& values);
  /// Leading text cells followed by numbers.
  void row(const std::vector<std::string>& labels, const std::vector<double>& values);
  void close();

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::string path_;
};

std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws InvalidArgument for an unknown column.
  int column(const std::string& name) const;
};

/// Reads a purely numeric CSV with a header row. Throws IoError.
CsvTable read_csv(const std::string& path);

}  // namespace deltailc
