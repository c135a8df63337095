#include "kcip/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace kcip {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) data_ += ',';
        data_ += columns_[i];
    }
    data_ += '\n';
}

void CsvTable::add_row(const std::vector<CsvValue>& values) {
    if (values.size() != columns_.size()) throw std::invalid_argument("CSV row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) data_ += ',';
        if (std::holds_alternative<std::int64_t>(values[i]))
            data_ += std::to_string(std::get<std::int64_t>(values[i]));
        else if (std::holds_alternative<double>(values[i]))
            data_ += format_double(std::get<double>(values[i]));
        else
            data_ += std::get<std::string>(values[i]);
    }
    data_ += '\n';
    ++rows_;
}

std::string CsvTable::body() const { return data_; }

void CsvTable::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << data_;
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace kcip
