#include "gridagg/lp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gridagg::lp {

namespace {

/// Shortest %g rendering that fits the 12-character numeric field.
std::string mps_number(double v) {
    char buf[40];
    for (int precision = 12; precision >= 1; --precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v);
        if (std::string_view(buf).size() <= 12) return buf;
    }
    return buf;
}

bool fits_fixed(const std::string& name) {
    return !name.empty() && name.size() <= 8 && name.find(' ') == std::string::npos;
}

/// Field layout: columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61.
std::string record(std::string_view code, std::string_view f1, std::string_view f2 = {}, std::string_view n2 = {},
                   std::string_view f3 = {}, std::string_view n3 = {}) {
    char buf[96];
    if (f3.empty()) {
        std::snprintf(buf, sizeof buf, " %-2.2s %-8.8s  %-8.8s  %12.12s", std::string(code).c_str(),
                      std::string(f1).c_str(), std::string(f2).c_str(), std::string(n2).c_str());
    } else {
        std::snprintf(buf, sizeof buf, " %-2.2s %-8.8s  %-8.8s  %12.12s   %-8.8s  %12.12s", std::string(code).c_str(),
                      std::string(f1).c_str(), std::string(f2).c_str(), std::string(n2).c_str(),
                      std::string(f3).c_str(), std::string(n3).c_str());
    }
    std::string line(buf);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line + "\n";
}

}  // namespace

std::string to_mps(const LinearProgram& lp, const std::string& model_name) {
    lp.check();
    const auto& vars = lp.variables();
    const auto& cons = lp.constraints();

    bool original = fits_fixed(model_name.empty() ? "X" : model_name);
    for (const auto& v : vars) original = original && fits_fixed(v.name) && v.name != "COST";
    for (const auto& c : cons) original = original && fits_fixed(c.name) && c.name != "COST";
    auto col_name = [&](std::size_t j) {
        if (original) return vars[j].name;
        char buf[16];
        std::snprintf(buf, sizeof buf, "C%07zu", j);
        return std::string(buf);
    };
    auto row_name = [&](std::size_t i) {
        if (original) return cons[i].name;
        char buf[16];
        std::snprintf(buf, sizeof buf, "R%07zu", i);
        return std::string(buf);
    };

    std::ostringstream out;
    out << "NAME          " << (fits_fixed(model_name) ? model_name : std::string("GRIDAGG")) << "\n";
    out << "ROWS\n";
    out << " N  COST\n";
    for (std::size_t i = 0; i < cons.size(); ++i) {
        const char* type = cons[i].relation == Relation::LessEqual ? "L"
                           : cons[i].relation == Relation::GreaterEqual ? "G" : "E";
        out << " " << type << "  " << row_name(i) << "\n";
    }

    std::vector<std::vector<std::pair<std::size_t, double>>> cols(vars.size());
    for (std::size_t i = 0; i < cons.size(); ++i)
        for (const auto& t : cons[i].terms) cols[t.var].push_back({i, t.coef});

    out << "COLUMNS\n";
    for (std::size_t j = 0; j < vars.size(); ++j) {
        std::vector<std::pair<std::string, double>> entries;
        if (vars[j].cost != 0.0) entries.push_back({"COST", vars[j].cost});
        for (const auto& [i, a] : cols[j]) entries.push_back({row_name(i), a});
        if (entries.empty()) entries.push_back({"COST", 0.0});
        const std::string name = col_name(j);
        for (std::size_t k = 0; k < entries.size(); k += 2) {
            if (k + 1 < entries.size()) {
                out << record("", name, entries[k].first, mps_number(entries[k].second), entries[k + 1].first,
                              mps_number(entries[k + 1].second));
            } else {
                out << record("", name, entries[k].first, mps_number(entries[k].second));
            }
        }
    }

    out << "RHS\n";
    for (std::size_t i = 0; i < cons.size(); ++i)
        if (cons[i].rhs != 0.0) out << record("", "RHS", row_name(i), mps_number(cons[i].rhs));

    std::ostringstream bounds;
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double lo = vars[j].lower, up = vars[j].upper;
        const std::string name = col_name(j);
        if (lo == up) {
            bounds << record("FX", "BND", name, mps_number(lo));
        } else if (!std::isfinite(lo) && !std::isfinite(up)) {
            bounds << record("FR", "BND", name);
        } else if (!std::isfinite(lo)) {
            bounds << record("MI", "BND", name);
            bounds << record("UP", "BND", name, mps_number(up));
        } else if (!std::isfinite(up)) {
            if (lo != 0.0) bounds << record("LO", "BND", name, mps_number(lo));
        } else {
            bounds << record("LO", "BND", name, mps_number(lo));
            bounds << record("UP", "BND", name, mps_number(up));
        }
    }
    const std::string bounds_text = bounds.str();
    if (!bounds_text.empty()) out << "BOUNDS\n" << bounds_text;
    out << "ENDATA\n";
    return out.str();
}

void write_mps(const LinearProgram& lp, const std::filesystem::path& path, const std::string& model_name) {
    const std::string text = to_mps(lp, model_name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write MPS file " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace gridagg::lp
