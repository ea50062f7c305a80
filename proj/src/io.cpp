#include "weakkam/io.hpp"
#include "weakkam/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace weakkam::io {

namespace {

using nlohmann::json;

json header_of(const GridFunction& u) {
    json h;
    h["n"] = u.n();
    h["d"] = u.dim();
    std::vector<double> c(static_cast<std::size_t>(u.meta.c.size()));
    for (Eigen::Index i = 0; i < u.meta.c.size(); ++i) c[static_cast<std::size_t>(i)] = u.meta.c[i];
    h["c"] = c;
    h["lambda"] = u.meta.lambda;
    h["alpha"] = u.meta.alpha;
    return h;
}

GridFunction from_header(const json& h) {
    try {
        GridFunction u(h.at("n").get<int>(), h.at("d").get<int>());
        const auto c = h.value("c", std::vector<double>{});
        if (!c.empty()) {
            u.meta.c = Vec(static_cast<Eigen::Index>(c.size()));
            for (std::size_t i = 0; i < c.size(); ++i) u.meta.c[static_cast<Eigen::Index>(i)] = c[i];
        }
        u.meta.lambda = h.value("lambda", 0.0);
        u.meta.alpha = h.value("alpha", 0.0);
        return u;
    } catch (const json::exception& e) {
        throw InputError(std::string("bad grid header: ") + e.what());
    }
}

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_grid_csv(const GridFunction& u, std::ostream& os) {
    os << "# " << header_of(u).dump() << '\n';
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto idx = u.multi_index(i);
        for (int a = 0; a < u.dim(); ++a) os << idx[static_cast<std::size_t>(a)] << ',';
        os << format_double(u[i]) << '\n';
    }
}

GridFunction read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw InputError("grid CSV lacks its header line");
    json h;
    try {
        h = json::parse(line.substr(2));
    } catch (const json::exception& e) {
        throw InputError(std::string("bad grid header: ") + e.what());
    }
    GridFunction u = from_header(h);
    std::vector<char> seen(u.size(), 0);
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        MultiIndex idx{};
        for (int a = 0; a < u.dim(); ++a) {
            if (!std::getline(ss, field, ',')) throw InputError("short grid CSV row: " + line);
            idx[static_cast<std::size_t>(a)] = std::stoi(field);
            if (idx[static_cast<std::size_t>(a)] < 0 || idx[static_cast<std::size_t>(a)] >= u.n()) {
                throw InputError("grid CSV index out of range: " + line);
            }
        }
        if (!std::getline(ss, field)) throw InputError("grid CSV row without value: " + line);
        const auto flat = u.flat_index(idx);
        u[flat] = std::strtod(field.c_str(), nullptr);
        seen[flat] = 1;
        ++rows;
    }
    if (rows != u.size() || std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw InputError("grid CSV does not cover every grid point exactly once");
    }
    return u;
}

void write_grid_binary(const GridFunction& u, std::ostream& os) {
    const std::string header = header_of(u).dump();
    os.write("GFN1", 4);
    const auto len = to_little(static_cast<std::uint32_t>(header.size()));
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (double v : u.values()) {
        const double le = to_little(v);
        os.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
}

GridFunction read_grid_binary(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "GFN1", 4) != 0) throw InputError("not a GFN1 grid file");
    std::uint32_t len = 0;
    if (!is.read(reinterpret_cast<char*>(&len), sizeof len)) throw InputError("truncated grid file");
    len = to_little(len);
    std::string header(len, '\0');
    if (!is.read(header.data(), len)) throw InputError("truncated grid header");
    json h;
    try {
        h = json::parse(header);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad grid header: ") + e.what());
    }
    GridFunction u = from_header(h);
    for (double& v : u.values()) {
        double le;
        if (!is.read(reinterpret_cast<char*>(&le), sizeof le)) throw InputError("truncated grid values");
        v = to_little(le);
    }
    return u;
}

void save_grid(const GridFunction& u, const std::string& path) {
    const bool text = ends_with(path, ".csv");
    std::ofstream os(path, text ? std::ios::out : std::ios::out | std::ios::binary);
    if (!os) throw InputError("cannot open " + path + " for writing");
    if (text) write_grid_csv(u, os);
    else write_grid_binary(u, os);
    if (!os) throw InputError("write failed for " + path);
}

GridFunction load_grid(const std::string& path) {
    const bool text = ends_with(path, ".csv");
    std::ifstream is(path, text ? std::ios::in : std::ios::in | std::ios::binary);
    if (!is) throw InputError("cannot open " + path);
    return text ? read_grid_csv(is) : read_grid_binary(is);
}

void write_cloud_csv(const GraphCloud& cloud, std::ostream& os) {
    for (int a = 1; a <= cloud.dim; ++a) os << "theta_" << a << ',';
    for (int a = 1; a <= cloud.dim; ++a) os << "p_" << a << ',';
    os << "source_tag\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (int a = 0; a < cloud.dim; ++a) os << format_double(cloud.theta[i][a]) << ',';
        for (int a = 0; a < cloud.dim; ++a) os << format_double(cloud.p[i][a]) << ',';
        os << cloud.source_tag << '\n';
    }
}

GraphCloud read_cloud_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("empty cloud CSV");
    int d = 0;
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.rfind("theta_", 0) == 0) ++d;
        }
    }
    if (d < 1 || d > kMaxDim) throw InputError("cloud CSV header has no theta columns");
    GraphCloud cloud;
    cloud.dim = d;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        Vec th(d), p(d);
        for (int a = 0; a < 2 * d; ++a) {
            if (!std::getline(ss, field, ',')) throw InputError("short cloud CSV row: " + line);
            (a < d ? th[a] : p[a - d]) = std::strtod(field.c_str(), nullptr);
        }
        std::getline(ss, field);
        cloud.source_tag = field;
        cloud.add(th, p);
    }
    return cloud;
}

}  // namespace weakkam::io
