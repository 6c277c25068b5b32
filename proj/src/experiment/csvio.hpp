// CSV writing: comma separated, '.' decimal, 17 significant digits so floats
// round-trip exactly, config echo as leading # comment lines.
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcavity {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CsvWriter {
  public:
    CsvWriter(const std::string& path,
              const std::vector<std::pair<std::string, std::string>>& config_echo,
              const std::vector<std::string>& extra_comments, const std::string& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<double>& values);
    void close();

  private:
    std::FILE* f_ = nullptr;
    std::string path_;
};

std::string format_value(double v);  // %.17g

}  // namespace qcavity
