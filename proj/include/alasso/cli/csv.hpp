#pragma once

#include "alasso/estimators.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace alasso::cli {

/// Raw cells of a delimited text file; numbers are parsed on demand so that
/// label columns can be dropped before conversion.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> cells;
    std::string source;
    /// The header was one field short of the data rows (leading row names),
    /// and the first data field of every row was discarded.
    bool had_row_names = false;

    std::size_t column(const std::string& name) const;
};

/// delimiter 0 picks tab when the header line contains one, comma otherwise.
CsvTable parse_csv(const std::string& text, char delimiter = 0, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path, char delimiter = 0);

/// Converts the named columns; throws NonNumericCell with the 1-based row and
/// column of the first bad cell.
Matrix numeric_columns(const CsvTable& table, const std::vector<std::size_t>& columns);

/// Response column plus every remaining column not listed in `drop`.
RegressionDataset dataset_from_table(const CsvTable& table, const std::string& response,
                                     const std::vector<std::string>& drop = {});

/// Header line then rows, every value with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values, char delimiter = ',');
void write_dataset(std::ostream& out, const RegressionDataset& data);

/// Shortest round-trip text is not needed; %.17g always round-trips.
std::string format_double(double v);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(const std::string& bytes);
std::string read_file(const std::string& path);

} // namespace alasso::cli
