#include "nsp/proposer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "nsp/learner.hpp"
#include "nsp/sexpr.hpp"

namespace nsp {

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::S1: return "S1";
    case Strategy::S2: return "S2";
    case Strategy::S3: return "S3";
  }
  return "S3";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "S1") return Strategy::S1;
  if (s == "S2") return Strategy::S2;
  if (s == "S3") return Strategy::S3;
  throw Error("unknown proposal strategy '" + s + "'");
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::vector<std::string> labeled(const AtomSet& atoms, const std::vector<Object>& objects) {
  std::map<int, std::string> labels;
  for (const auto& o : objects) labels[o.id] = o.type + std::to_string(o.id);
  std::vector<std::string> out;
  for (const auto& a : atoms) {
    std::string s = a.predicate + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? ", " : "") + labels[a.args[i]];
    out.push_back(s + ")");
  }
  return out;
}

// Replaces the symbol `from` by `to` outside string literals.
std::string rename_symbol(const std::string& src, const std::string& from, const std::string& to) {
  std::string out;
  bool in_string = false;
  std::size_t i = 0;
  auto delim = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')'; };
  while (i < src.size()) {
    const char c = src[i];
    if (in_string) {
      out.push_back(c);
      if (c == '\\' && i + 1 < src.size()) out.push_back(src[++i]);
      else if (c == '"') in_string = false;
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      ++i;
      continue;
    }
    if (delim(c)) {
      out.push_back(c);
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < src.size() && !delim(src[j]) && src[j] != '"') ++j;
    const std::string tok = src.substr(i, j - i);
    out += tok == from ? to : tok;
    i = j;
  }
  return out;
}

}  // namespace

ProposalRequest make_request(Strategy strategy, int iteration, const TransitionDataset& data,
                             const PredicateTable& psi, const PerceptionSetup& setup, std::size_t per_skill) {
  ProposalRequest req;
  req.strategy = strategy;
  req.iteration = iteration;
  req.psi = psi.decls();
  if (strategy == Strategy::S3) return req;
  const auto abs = abstract_dataset(data, psi, setup);
  std::map<std::pair<std::string, bool>, std::size_t> counts;
  for (const auto& p : abs.positives) {
    auto& n = counts[{p.skill.spec.name, true}];
    if (n++ >= per_skill) continue;
    req.exemplars.push_back({p.skill.spec.name, true, labeled(p.pre, *p.objects),
                             strategy == Strategy::S2 ? labeled(p.post, *p.objects) : std::vector<std::string>{}});
  }
  for (const auto& ng : abs.negatives) {
    auto& n = counts[{ng.skill.spec.name, false}];
    if (n++ >= per_skill) continue;
    req.exemplars.push_back({ng.skill.spec.name, false, labeled(ng.state, *ng.objects), {}});
  }
  return req;
}

ProposalPool ProposalPool::parse(const std::string& text) {
  ProposalPool pool;
  std::istringstream in(text);
  std::string line;
  std::optional<PoolEntry> pending;
  std::string body;
  auto flush = [&]() {
    if (!pending) return;
    auto decls = parse_predicates(body);
    if (decls.size() != 1) throw Error("pool entry must hold exactly one declaration");
    pending->source = body;
    pending->decl = decls.front();
    pool.entries.push_back(std::move(*pending));
    pending.reset();
    body.clear();
  };
  while (std::getline(in, line)) {
    if (line.rfind(";;@", 0) == 0) {
      flush();
      PoolEntry e;
      std::istringstream hs(line.substr(3));
      std::string tok;
      hs >> tok;
      e.strategy = parse_strategy(tok);
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw Error("malformed pool header token '" + tok + "'");
        const auto key = tok.substr(0, eq);
        const auto vals = split(tok.substr(eq + 1), ',');
        if (key == "after-success") e.after_success.insert(vals.begin(), vals.end());
        else if (key == "after-failure") e.after_failure.insert(vals.begin(), vals.end());
        else if (key == "requires") e.requires_predicates.insert(e.requires_predicates.end(), vals.begin(), vals.end());
        else throw Error("unknown pool header key '" + key + "'");
      }
      pending = std::move(e);
    } else if (pending) {
      body += line + "\n";
    }
  }
  flush();
  return pool;
}

bool ProposalPool::available(const PoolEntry& e, const ProposalRequest& req) const {
  for (const auto& r : e.requires_predicates) {
    const bool present = std::any_of(req.psi.begin(), req.psi.end(), [&](const PredicateDecl& d) { return d.name == r; });
    if (!present) return false;
  }
  if (e.after_success.empty() && e.after_failure.empty()) return true;
  return std::any_of(req.exemplars.begin(), req.exemplars.end(), [&](const Exemplar& x) {
    return (x.success ? e.after_success : e.after_failure).count(x.skill) != 0;
  });
}

std::vector<PredicateDecl> ScriptedProposer::generate(const ProposalRequest& req) {
  std::vector<PredicateDecl> out;
  for (const auto& e : pool_.entries) {
    if (e.strategy == req.strategy && pool_.available(e, req)) out.push_back(e.decl);
  }
  return out;
}

std::string request_to_json(const ProposalRequest& req) {
  nlohmann::json j;
  j["strategy"] = strategy_name(req.strategy);
  j["iteration"] = req.iteration;
  j["psi"] = nlohmann::json::array();
  for (const auto& d : req.psi) j["psi"].push_back(print_decl(d));
  j["exemplars"] = nlohmann::json::array();
  for (const auto& x : req.exemplars) {
    j["exemplars"].push_back({{"skill", x.skill},
                              {"outcome", x.success ? "success" : "failure"},
                              {"before", x.before},
                              {"after", x.after}});
  }
  return j.dump(2);
}

std::vector<PredicateDecl> parse_response(const std::string& body, const DiagnosticSink& log) {
  std::vector<PredicateDecl> out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    if (log) log(std::string("unreadable proposer response: ") + e.what());
    return out;
  }
  if (!j.is_object() || !j.contains("predicates") || !j["predicates"].is_array()) {
    if (log) log("proposer response lacks a 'predicates' array");
    return out;
  }
  for (const auto& item : j["predicates"]) {
    if (!item.is_string()) {
      if (log) log("skipping non-string proposal");
      continue;
    }
    try {
      for (auto& d : parse_predicates(item.get<std::string>())) out.push_back(std::move(d));
    } catch (const Error& e) {
      if (log) log(std::string("dropping malformed proposal: ") + e.what());
    }
  }
  return out;
}

std::vector<PredicateDecl> ExternalProposer::generate(const ProposalRequest& req) {
  const auto& ep = cfg_.endpoint;
  const auto scheme = ep.find("://");
  const auto path_at = ep.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  const std::string host = path_at == std::string::npos ? ep : ep.substr(0, path_at);
  const std::string path = path_at == std::string::npos ? "/" : ep.substr(path_at);
  httplib::Client cli(host);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg_.timeout - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());
  auto res = cli.Post(path, request_to_json(req), "application/json");
  if (!res) {
    if (log_) log_("proposer transport error: " + httplib::to_string(res.error()));
    return {};
  }
  if (res->status != 200) {
    if (log_) log_("proposer returned HTTP " + std::to_string(res->status));
    return {};
  }
  auto out = parse_response(res->body, log_);
  if (out.size() > cfg_.max_proposals) out.resize(cfg_.max_proposals);
  return out;
}

std::vector<PredicateDecl> filter_proposals(const std::vector<PredicateDecl>& raw, const PredicateTable& psi,
                                            const TypeTable& types, const DiagnosticSink& log) {
  std::set<std::string> bodies;
  std::set<std::string> names;
  for (const auto& d : psi.decls()) {
    bodies.insert(canonical_body(d));
    names.insert(d.name);
  }
  std::vector<PredicateDecl> accepted;
  PredicateTable current = psi;
  for (const auto& d0 : raw) {
    PredicateDecl d = d0;
    const auto body = canonical_body(d);
    if (bodies.count(body)) continue;
    if (names.count(d.name)) {
      int k = 2;
      while (names.count(d.name + std::to_string(k))) ++k;
      const auto fresh = d.name + std::to_string(k);
      d = parse_predicates(rename_symbol(print_decl(d), d.name, fresh)).front();
    }
    try {
      current = current.with({d}, types);
    } catch (const Error& e) {
      if (log) log("dropping proposal " + d.name + ": " + e.what());
      continue;
    }
    bodies.insert(body);
    names.insert(d.name);
    accepted.push_back(std::move(d));
  }
  return accepted;
}

std::vector<PredicateDecl> propose(const ProposalRequest& req, ProposalSource& source, const PredicateTable& psi,
                                   const TypeTable& types, const DiagnosticSink& log) {
  return filter_proposals(source.generate(req), psi, types, log);
}

}  // namespace nsp
