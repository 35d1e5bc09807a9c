#ifndef RDV_CSV_HPP
#define RDV_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace rdv {

/// Shortest round-trip text for a double ("inf", "-inf", "nan" for non-finite values).
std::string format_real(double v);

/**
 * @brief In-memory CSV table with a fixed header.
 */
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    class Row {
    public:
        Row& operator<<(double v);
        Row& operator<<(int v);
        Row& operator<<(long v);
        Row& operator<<(unsigned long v);
        Row& operator<<(const std::string& v);
        Row& operator<<(const char* v);
        ~Row();

        Row(const Row&) = delete;
        Row& operator=(const Row&) = delete;

    private:
        friend class CsvTable;
        explicit Row(CsvTable& t) : table_(t) {}
        CsvTable& table_;
        std::vector<std::string> cells_;
    };

    Row row() { return Row(*this); }

    const std::vector<std::string>& header() const { return header_; }
    std::size_t size() const { return rows_.size(); }
    std::string str() const;
    void write(const std::filesystem::path& file) const;

private:
    std::vector<std::string> header_;
    std::vector<std::string> rows_;
};

}  // namespace rdv

#endif  // RDV_CSV_HPP
