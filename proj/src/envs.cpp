#include "nsp/envs.hpp"

#include <algorithm>
#include <map>

namespace nsp {

namespace detail {
const std::map<std::string, std::string>& embedded_assets();
}

std::vector<std::string> domain_names() { return {"balance", "blocks", "coffee", "cover", "cover_heavy"}; }

Domain make_domain(const std::string& name) {
  if (name == "cover") return make_cover_domain(false);
  if (name == "cover_heavy") return make_cover_domain(true);
  if (name == "blocks") return make_blocks_domain();
  if (name == "coffee") return make_coffee_domain();
  if (name == "balance") return make_balance_domain();
  throw UnknownDomain(name);
}

std::string domain_asset(const std::string& domain, const std::string& file) {
  const auto& assets = detail::embedded_assets();
  auto it = assets.find(domain + "/" + file);
  if (it == assets.end()) throw Error("missing domain asset " + domain + "/" + file);
  return it->second;
}

namespace sim {

FeatureState make_state(const TypeTable& types, const std::vector<Object>& objects) {
  FeatureState s;
  s.objects = objects;
  std::sort(s.objects.begin(), s.objects.end(), [](const Object& a, const Object& b) { return a.id < b.id; });
  for (const auto& o : s.objects) {
    std::vector<double> f;
    for (const auto& def : types.get(o.type).features) f.push_back(def.lo);
    s.features[o.id] = std::move(f);
  }
  return s;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  // Modulo sampling keeps streams identical across standard libraries.
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(rng() % span);
}

double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return lo + (hi - lo) * u;
}

}  // namespace sim

}  // namespace nsp
