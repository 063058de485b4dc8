#include "qwfh/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "qwfh/errors.hpp"

namespace qwfh::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string scan_csv_header(int max_clicks) {
    std::string h = "phi";
    for (int m = 0; m <= max_clicks; ++m) {
        for (int mp = 0; mp <= max_clicks; ++mp) {
            h += ",P" + std::to_string(m) + std::to_string(mp);
        }
    }
    return h;
}

std::string scan_csv(const homodyne::PhaseScan& scan, int max_clicks) {
    std::ostringstream os;
    os << scan_csv_header(max_clicks) << '\n';
    for (std::size_t i = 0; i < scan.grid.size(); ++i) {
        const Eigen::MatrixXd& P = scan.results[i].P;
        if (P.rows() <= max_clicks || P.cols() <= max_clicks) {
            throw DimensionMismatch("click matrix smaller than the requested CSV columns");
        }
        os << format_double(scan.grid[i]);
        for (int m = 0; m <= max_clicks; ++m) {
            for (int mp = 0; mp <= max_clicks; ++mp) {
                os << ',' << format_double(P(m, mp));
            }
        }
        os << '\n';
    }
    return os.str();
}

std::string click_matrix_csv(const Eigen::MatrixXd& P) {
    std::ostringstream os;
    os << "m\\mp";
    for (int j = 0; j < P.cols(); ++j) {
        os << ',' << j;
    }
    os << '\n';
    for (int i = 0; i < P.rows(); ++i) {
        os << i;
        for (int j = 0; j < P.cols(); ++j) {
            os << ',' << format_double(P(i, j));
        }
        os << '\n';
    }
    return os.str();
}

Eigen::MatrixXd parse_click_matrix_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty click-matrix CSV");
    }
    const long cols = std::count(line.begin(), line.end(), ',');
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');  // row label
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("bad number '" + cell + "' in click-matrix CSV");
            }
        }
        if (static_cast<long>(row.size()) != cols) {
            throw IoError("ragged click-matrix CSV");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw IoError("click-matrix CSV has no data rows");
    }
    Eigen::MatrixXd P(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (long j = 0; j < cols; ++j) {
            P(i, j) = rows[i][j];
        }
    }
    return P;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace qwfh::io
