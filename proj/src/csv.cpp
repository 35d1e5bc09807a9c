#include "rdv/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "rdv/errors.hpp"

namespace rdv {

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable::Row& CsvTable::Row::operator<<(double v) {
    cells_.push_back(format_real(v));
    return *this;
}
CsvTable::Row& CsvTable::Row::operator<<(int v) {
    cells_.push_back(std::to_string(v));
    return *this;
}
CsvTable::Row& CsvTable::Row::operator<<(long v) {
    cells_.push_back(std::to_string(v));
    return *this;
}
CsvTable::Row& CsvTable::Row::operator<<(unsigned long v) {
    cells_.push_back(std::to_string(v));
    return *this;
}
CsvTable::Row& CsvTable::Row::operator<<(const std::string& v) {
    cells_.push_back(v);
    return *this;
}
CsvTable::Row& CsvTable::Row::operator<<(const char* v) {
    cells_.emplace_back(v);
    return *this;
}

CsvTable::Row::~Row() {
    std::string line;
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (i) line += ',';
        line += cells_[i];
    }
    table_.rows_.push_back(std::move(line));
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void CsvTable::write(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << str();
}

}  // namespace rdv
