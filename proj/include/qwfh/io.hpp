#pragma once

#include <string>

#include <Eigen/Dense>

#include "qwfh/detector.hpp"
#include "qwfh/homodyne.hpp"

// Text artifacts consumed by the plotting scripts. Every number is written
// with 17 significant digits.
namespace qwfh::io {

std::string format_double(double x);

/// Header `phi,P00,P01,...` up to P(max_clicks, max_clicks).
std::string scan_csv_header(int max_clicks = 2);

/// One row per grid point; phi is the scan-axis phase in radians.
std::string scan_csv(const homodyne::PhaseScan& scan, int max_clicks = 2);

/// Click matrix with a header row and a leading column of click counts.
std::string click_matrix_csv(const Eigen::MatrixXd& P);

/// Inverse of click_matrix_csv.
Eigen::MatrixXd parse_click_matrix_csv(const std::string& text);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

} // namespace qwfh::io
