#pragma once

#include <array>
#include <string>
#include <vector>

#include "pilab/types.hpp"

namespace pilab {

// One SKU-DC pair's series over the full horizon. leadtime holds the raw
// real-valued process; the simulator floors and clamps it at placement.
struct ProductSeries {
    int sku = 0;
    int dc = 0;
    std::vector<double> demand;
    std::vector<double> leadtime;
    std::array<std::vector<double>, 4> x;  // covariates x1..x4
};

struct ScenarioSet {
    int instance_id = 0;
    std::string config_name;  // IC/CC/CR/SCR or "external"
    int T = 0;
    std::vector<ProductSeries> products;
    std::array<double, 4> mu{};  // feature means drawn for this instance

    int n_products() const { return static_cast<int>(products.size()); }
    void validate() const;
};

void write_csv(const ScenarioSet& set, const std::string& path);
ScenarioSet read_csv(const std::string& path);

}  // namespace pilab
