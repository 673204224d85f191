#pragma once
// File and text helpers shared by the serializers and the CLI.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace teamcomm {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// printf("%.*g") with `digits` significant digits; non-finite values become "null".
std::string format_number(double v, int digits = 17);
// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

// JSON array text for a row-major matrix, e.g. [[1,2],[3,4]], 17 significant digits.
std::string json_matrix(const Eigen::MatrixXd& m);
std::string json_vector(const Eigen::VectorXd& v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;  // throws Error if absent
};

// Minimal CSV: comma separated, no quoting, blank lines skipped.
CsvTable parse_csv(std::string_view text);
double parse_double(std::string_view s);

}  // namespace teamcomm
