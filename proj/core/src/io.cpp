#include "lram/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "lram/errors.hpp"

namespace lram::io {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::InvalidArgument, "write failed for " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::InvalidArgument, "sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_phi(const StructuredGrid& grid, const Vec& phi) {
    if (phi.size() != grid.node_count()) {
        throw Error(ErrorKind::MeshIncompatibility, "phi length does not match the grid");
    }
    std::string out;
    for (int j = 0; j <= grid.ny; ++j) {
        for (int i = 0; i <= grid.nx; ++i) {
            if (i) out += ' ';
            out += fmt(phi(grid.node(i, j)));
        }
        out += '\n';
    }
    return out;
}

Vec parse_phi(const StructuredGrid& grid, const std::string& text) {
    Vec phi(grid.node_count());
    std::istringstream in(text);
    std::string line;
    int j = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        if (j > grid.ny) throw Error(ErrorKind::MeshIncompatibility, "phi file has too many rows");
        std::istringstream row(line);
        int i = 0;
        double v;
        while (row >> v) {
            if (i <= grid.nx) phi(grid.node(i, j)) = v;
            ++i;
        }
        if (i != grid.nx + 1 || !row.eof()) {
            throw Error(ErrorKind::MeshIncompatibility,
                        "phi row " + std::to_string(j + 1) + " should hold " + std::to_string(grid.nx + 1) + " numbers");
        }
        ++j;
    }
    if (j != grid.ny + 1) {
        throw Error(ErrorKind::MeshIncompatibility,
                    "phi file has " + std::to_string(j) + " rows, expected " + std::to_string(grid.ny + 1));
    }
    return phi;
}

std::string iteration_log_csv(const std::vector<IterationRecord>& history) {
    std::string out = "iter,Pi,f,g,lambda_star1,lambda1,vol_frac_dense,vol_frac_soft\n";
    for (const auto& r : history) {
        out += std::to_string(r.iter);
        for (double v : {r.pi, r.f, r.g, r.lambda_star1, r.lambda1, r.vol_frac_dense, r.vol_frac_soft}) {
            out += ',';
            out += fmt(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace lram::io
