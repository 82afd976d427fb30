#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace switchq {

// Fixed CSV output contract: header row, 17 significant digits, UTF-8, LF.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : path_(path) {
    out_.open(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
    write_row_strings(header);
  }

  void write_row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  class Row {
   public:
    explicit Row(CsvWriter& w) : writer_(w) {}
    Row& cell(const std::string& v) {
      cells_.push_back(v);
      return *this;
    }
    Row& cell(double v) { return cell(format_value(v)); }
    Row& cell(long long v) { return cell(std::to_string(v)); }
    Row& cell(std::size_t v) { return cell(std::to_string(v)); }
    Row& cell(int v) { return cell(std::to_string(v)); }
    ~Row() { writer_.write_row_strings(cells_); }

   private:
    CsvWriter& writer_;
    std::vector<std::string> cells_;
  };

  Row row() { return Row(*this); }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace switchq
