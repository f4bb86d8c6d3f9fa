#include "alasso/cli/csv.hpp"

#include "alasso/core/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace alasso::cli {

namespace {

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split(const std::string& line, char delim)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        if (ch == delim && !quoted) {
            out.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    out.push_back(trim(field));
    return out;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

} // namespace

std::size_t CsvTable::column(const std::string& name) const
{
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == name) return j;
    fail(ErrorCode::InvalidArgument, source + ": no column named '" + name + "'");
}

CsvTable parse_csv(const std::string& text, char delimiter, const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    CsvTable t;
    t.source = source;
    while (std::getline(in, line)) {
        ++line_no;
        if (!blank(line)) break;
    }
    if (blank(line)) fail(ErrorCode::MalformedCsv, source + ": no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const char delim = delimiter ? delimiter : (line.find('\t') != std::string::npos ? '\t' : ',');
    t.header = split(line, delim);
    if (!t.header.empty() && t.header.front().empty()) {
        // R-style files write an empty name above the row labels.
        t.header.erase(t.header.begin());
        t.had_row_names = true;
    }
    for (std::size_t j = 0; j < t.header.size(); ++j)
        if (t.header[j].empty())
            fail(ErrorCode::MalformedCsv, source + ": header column " + std::to_string(j + 1) + " has no name");

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        ++row;
        auto fields = split(line, delim);
        if (row == 1 && !t.had_row_names && fields.size() == t.header.size() + 1) t.had_row_names = true;
        if (t.had_row_names && !fields.empty()) fields.erase(fields.begin());
        if (fields.size() != t.header.size())
            fail(ErrorCode::MalformedCsv, source + ": row " + std::to_string(row) + " (line " +
                                              std::to_string(line_no) + ") has " + std::to_string(fields.size()) +
                                              " fields, expected " + std::to_string(t.header.size()));
        t.cells.push_back(std::move(fields));
    }
    if (t.cells.empty()) fail(ErrorCode::EmptySample, source + ": no data rows");
    return t;
}

std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CsvTable read_csv(const std::string& path, char delimiter) { return parse_csv(read_file(path), delimiter, path); }

Matrix numeric_columns(const CsvTable& table, const std::vector<std::size_t>& columns)
{
    Matrix m(table.cells.size(), columns.size());
    for (std::size_t i = 0; i < table.cells.size(); ++i)
        for (std::size_t k = 0; k < columns.size(); ++k) {
            const std::string& cell = table.cells[i][columns[k]];
            double v = 0.0;
            const char* first = cell.data();
            const char* last = first + cell.size();
            if (!cell.empty() && *first == '+') ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
                fail(ErrorCode::NonNumericCell, table.source + ": row " + std::to_string(i + 1) + ", column " +
                                                    std::to_string(columns[k] + 1) + " ('" +
                                                    table.header[columns[k]] + "'): '" + cell + "' is not a number");
            m(i, k) = v;
        }
    return m;
}

RegressionDataset dataset_from_table(const CsvTable& table, const std::string& response,
                                     const std::vector<std::string>& drop)
{
    const std::size_t ry = table.column(response);
    for (const auto& d : drop) table.column(d);
    std::vector<std::size_t> cols;
    RegressionDataset data;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j == ry || std::find(drop.begin(), drop.end(), table.header[j]) != drop.end()) continue;
        cols.push_back(j);
        data.names.push_back(table.header[j]);
    }
    if (cols.empty()) fail(ErrorCode::InvalidArgument, table.source + ": no covariate columns");
    data.x = numeric_columns(table, cols);
    data.y = numeric_columns(table, {ry}).col(0);
    data.response_name = response;
    data.validate();
    return data;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matrix& values, char delimiter)
{
    if (header.size() != values.cols()) fail(ErrorCode::DimensionMismatch, "header width differs from the data");
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? std::string(1, delimiter) : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < values.rows(); ++i) {
        for (std::size_t j = 0; j < values.cols(); ++j)
            out << (j ? std::string(1, delimiter) : "") << format_double(values(i, j));
        out << '\n';
    }
}

void write_dataset(std::ostream& out, const RegressionDataset& data)
{
    std::vector<std::string> header{data.response_name};
    Matrix m(data.n(), data.p() + 1);
    for (std::size_t j = 0; j < data.p(); ++j)
        header.push_back(j < data.names.size() ? data.names[j] : "x" + std::to_string(j + 1));
    for (std::size_t i = 0; i < data.n(); ++i) {
        m(i, 0) = data.y[i];
        for (std::size_t j = 0; j < data.p(); ++j) m(i, j + 1) = data.x(i, j);
    }
    write_csv(out, header, m);
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace alasso::cli
