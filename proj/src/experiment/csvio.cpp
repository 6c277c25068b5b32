#include "experiment/csvio.hpp"

namespace qcavity {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& config_echo,
                     const std::vector<std::string>& extra_comments, const std::string& header)
    : path_(path) {
    f_ = std::fopen(path.c_str(), "wb");
    if (!f_) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& [k, v] : config_echo) std::fprintf(f_, "# %s = %s\n", k.c_str(), v.c_str());
    for (const auto& c : extra_comments) std::fprintf(f_, "# %s\n", c.c_str());
    std::fprintf(f_, "%s\n", header.c_str());
}

CsvWriter::~CsvWriter() {
    if (f_) std::fclose(f_);
}

void CsvWriter::row(const std::vector<double>& values) {
    for (size_t i = 0; i < values.size(); ++i)
        std::fprintf(f_, "%s%s", i ? "," : "", format_value(values[i]).c_str());
    std::fputc('\n', f_);
}

void CsvWriter::close() {
    if (f_) {
        if (std::fclose(f_) != 0) {
            f_ = nullptr;
            throw IoError("error closing '" + path_ + "'");
        }
        f_ = nullptr;
    }
}

}  // namespace qcavity
