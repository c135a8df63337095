#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace kcip {

// Shortest round-trip decimal rendering (std::to_chars); identical input
// bits give identical strings on any conforming platform, which is what
// keeps CSV bodies byte-stable across reruns.
std::string format_double(double v);

using CsvValue = std::variant<std::int64_t, double, std::string>;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns);

    void add_row(const std::vector<CsvValue>& values);
    std::string body() const;                  // header + rows, '\n' endings
    void write(const std::string& path) const;
    std::size_t rows() const { return rows_; }

private:
    std::vector<std::string> columns_;
    std::string data_;
    std::size_t rows_ = 0;
};

}  // namespace kcip
