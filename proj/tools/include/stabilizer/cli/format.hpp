#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace stabilizer::cli {

/// 17 significant digits with a "." decimal
/// separator regardless of locale. Non-finite values print as nan/inf/-inf.
std::string format_double(double value);

/// FNV-1a over the formatted entries, as 16 lowercase hex digits.
std::string amplitude_hash(const Eigen::MatrixXd& values);

/// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(std::string_view text);

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

}  // namespace stabilizer::cli
