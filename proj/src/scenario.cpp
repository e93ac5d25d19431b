#include "pilab/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pilab {

void ScenarioSet::validate() const {
    if (products.empty()) throw std::invalid_argument("ScenarioSet: no products");
    for (const auto& p : products) {
        if (static_cast<int>(p.demand.size()) != T ||
            static_cast<int>(p.leadtime.size()) != T)
            throw std::invalid_argument("ScenarioSet: series length mismatch");
        for (const auto& xc : p.x)
            if (static_cast<int>(xc.size()) != T)
                throw std::invalid_argument("ScenarioSet: covariate length mismatch");
        for (double d : p.demand)
            if (!(d >= 0.0)) throw std::invalid_argument("ScenarioSet: negative demand");
    }
}

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_csv(const ScenarioSet& set, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    os << "instance_id,sku,dc,t,demand,leadtime,x1,x2,x3,x4\n";
    for (const auto& p : set.products) {
        for (int t = 1; t <= set.T; ++t) {
            os << set.instance_id << ',' << p.sku << ',' << p.dc << ',' << t << ','
               << fmt(p.demand[t - 1]) << ',';
            if (std::isfinite(p.leadtime[t - 1])) os << fmt(p.leadtime[t - 1]);
            os << ',' << fmt(p.x[0][t - 1]) << ',' << fmt(p.x[1][t - 1]) << ','
               << fmt(p.x[2][t - 1]) << ',' << fmt(p.x[3][t - 1]) << '\n';
        }
    }
    if (!os) throw std::runtime_error("write_csv: write failed for " + path);
}

ScenarioSet read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty file " + path);
    if (line.rfind("instance_id,", 0) != 0)
        throw std::runtime_error("read_csv: unexpected header in " + path);

    ScenarioSet set;
    set.config_name = "external";
    std::map<std::pair<int, int>, std::size_t> index;
    int max_t = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        auto next = [&]() {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("read_csv: short row");
            return tok;
        };
        set.instance_id = std::stoi(next());
        const int sku = std::stoi(next());
        const int dc = std::stoi(next());
        const int t = std::stoi(next());
        const double demand = std::stod(next());
        std::string lt = next();
        const double lead = lt.empty() ? std::nan("") : std::stod(lt);
        double xv[4];
        for (double& v : xv) v = std::stod(next());

        auto key = std::make_pair(sku, dc);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, set.products.size()).first;
            set.products.push_back(ProductSeries{sku, dc, {}, {}, {}});
        }
        auto& p = set.products[it->second];
        if (t != static_cast<int>(p.demand.size()) + 1)
            throw std::runtime_error("read_csv: non-contiguous periods for a product");
        p.demand.push_back(demand);
        p.leadtime.push_back(lead);
        for (int k = 0; k < 4; ++k) p.x[k].push_back(xv[k]);
        max_t = std::max(max_t, t);
    }
    set.T = max_t;
    set.validate();
    return set;
}

}  // namespace pilab
