#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "arbor/acceptance.hpp"
#include "arbor/dimension.hpp"
#include "arbor/grigfilt.hpp"
#include "arbor/permquot.hpp"
#include "arbor/sexpr.hpp"
#include "arbor/zoo.hpp"

namespace {

constexpr const char* kVersion = "arbor 0.1.0";

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Run {
  std::string subcommand;
  std::vector<std::string> argv;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> output_digests;
  std::string manifest_path;
  std::string out_path;

  void emit(const std::string& artifact_name, const std::string& bytes) {
    output_digests[artifact_name] = sha256_hex(bytes);
    if (out_path.empty()) {
      std::cout << bytes;
      if (!bytes.empty() && bytes.back() != '\n') std::cout << "\n";
    } else {
      std::ofstream f(out_path, std::ios::binary);
      f << bytes;
    }
  }

  void write_manifest() {
    if (manifest_path.empty()) return;
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["parameters"] = argv;
    j["input_digests"] = input_digests;
    j["tool_version"] = kVersion;
    j["output_digests"] = output_digests;
    std::ofstream f(manifest_path);
    f << j.dump(2) << "\n";
  }
};

// Optional request-level result cache keyed by the canonical request string.
std::optional<std::string> cache_lookup(const std::string& key) {
  const char* dir = std::getenv("ARBOR_CACHE_DIR");
  if (!dir) return std::nullopt;
  std::filesystem::path p = std::filesystem::path(dir) / (sha256_hex(key) + ".artifact");
  if (!std::filesystem::exists(p)) return std::nullopt;
  return read_file(p.string());
}

void cache_store(const std::string& key, const std::string& bytes) {
  const char* dir = std::getenv("ARBOR_CACHE_DIR");
  if (!dir) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::filesystem::path p = std::filesystem::path(dir) / (sha256_hex(key) + ".artifact");
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

struct GroupArgs {
  std::string name;
  std::string params_json;
  std::string file;

  arbor::GroupSpec resolve(Run& run) const {
    if (!file.empty()) {
      std::string bytes = read_file(file);
      run.input_digests[file] = sha256_hex(bytes);
      return arbor::GroupSpec::from_json(bytes);
    }
    return arbor::construct_by_name(name, params_json);
  }
};

void add_group_options(CLI::App* cmd, GroupArgs& g, unsigned& m, unsigned& r, std::string& h,
                       std::string& gamma, unsigned& p) {
  cmd->add_option("--group", g.name, "group name (grigorchuk, basilica, adding, sunic, lx, siegenthaler, wp2)");
  cmd->add_option("--group-file", g.file, "group definition JSON file");
  cmd->add_option("--params", g.params_json, "constructor parameters as JSON");
  cmd->add_option("--m", m, "tree arity");
  cmd->add_option("--r", r, "spine length / family index");
  cmd->add_option("--h", h, "rooted group spec (c2, c3, cp, sym3, cycle)");
  cmd->add_option("--gamma", gamma, "target measure (rational p/q)");
  cmd->add_option("--p", p, "prime for wp2");
}

std::string assemble_params(const std::string& given, unsigned m, unsigned r, const std::string& h,
                            const std::string& gamma, unsigned p) {
  if (!given.empty()) return given;
  nlohmann::ordered_json j;
  if (m) j["m"] = m;
  if (r) j["r"] = r;
  if (!h.empty()) j["h"] = h;
  if (!gamma.empty()) j["X"] = {{"gamma", gamma}};
  if (p) j["p"] = p;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact computations for self-similar groups on rooted trees"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Run run;
  for (int i = 1; i < argc; ++i) run.argv.push_back(argv[i]);
  app.add_option("--manifest", run.manifest_path, "write a reproducibility manifest to this path");
  app.add_option("--out", run.out_path, "write the artifact to this path instead of stdout");
  unsigned jobs = 1;
  app.add_option("--jobs", jobs, "concurrent level computations");

  // construct
  auto* c_construct = app.add_subcommand("construct", "emit a named group definition");
  std::string cname, cemit = "json";
  GroupArgs cgroup;
  unsigned cm = 0, cr = 0, cp = 0;
  std::string ch, cgamma;
  c_construct->add_option("name", cname, "group name")->required();
  c_construct->add_option("--emit", cemit, "json | sexpr");
  c_construct->add_option("--params", cgroup.params_json, "constructor parameters as JSON");
  c_construct->add_option("--m", cm);
  c_construct->add_option("--r", cr);
  c_construct->add_option("--h", ch);
  c_construct->add_option("--gamma", cgamma);
  c_construct->add_option("--p", cp);

  // quotients
  auto* c_quot = app.add_subcommand("quotients", "exact congruence quotient orders");
  GroupArgs qgroup;
  unsigned qm = 0, qr = 0, qp = 0;
  std::string qh, qgamma;
  std::size_t qlevels = 5;
  add_group_options(c_quot, qgroup, qm, qr, qh, qgamma, qp);
  c_quot->add_option("--levels", qlevels, "maximum level");

  // hdim
  auto* c_hdim = app.add_subcommand("hdim", "Hausdorff dimension enclosure in W_H");
  GroupArgs hgroup;
  unsigned hm = 0, hr = 0, hp = 0;
  std::string hh, hgamma;
  std::size_t hlevels = 8;
  add_group_options(c_hdim, hgroup, hm, hr, hh, hgamma, hp);
  c_hdim->add_option("--levels", hlevels, "table depth N");

  // mu
  auto* c_mu = app.add_subcommand("mu", "antichain for a target measure");
  std::string mu_target = "1/2";
  unsigned mu_m = 2;
  std::size_t mu_depth = 20;
  c_mu->add_option("--target", mu_target, "target measure (rational)");
  c_mu->add_option("--m", mu_m, "tree arity");
  c_mu->add_option("--depth", mu_depth, "evaluation depth");

  // grig-filt
  auto* c_filt = app.add_subcommand("grig-filt", "Grigorchuk filtration tables");
  unsigned f_max_m = 4;
  std::size_t f_level = 6;
  std::string f_emit = "csv";
  c_filt->add_option("--max-m", f_max_m, "largest filtration index");
  c_filt->add_option("--level", f_level, "probe level for the empirical columns");
  c_filt->add_option("--emit", f_emit, "csv");

  // verify
  auto* c_verify = app.add_subcommand("verify", "run the full verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_construct->parsed()) {
      run.subcommand = "construct";
      std::string params = assemble_params(cgroup.params_json, cm, cr, ch, cgamma, cp);
      arbor::GroupSpec g = arbor::construct_by_name(cname, params);
      std::string bytes;
      if (cemit == "json") {
        bytes = g.to_json() + "\n";
      } else if (cemit == "sexpr") {
        arbor::MachineRegistry reg;
        if (g.machine) reg[g.machine->name()] = g.machine;
        std::ostringstream ss;
        for (std::size_t i = 0; i < g.gens.size(); ++i)
          ss << g.gen_names[i] << " = " << arbor::to_sexpr(g.gens[i], reg) << "\n";
        bytes = ss.str();
      } else {
        std::cerr << "{\"error\": \"unknown emit format\"}\n";
        return 2;
      }
      run.emit("group." + cemit, bytes);
    } else if (c_quot->parsed()) {
      run.subcommand = "quotients";
      if (qgroup.name.empty() && qgroup.file.empty()) {
        std::cerr << "{\"error\": \"quotients needs --group or --group-file\"}\n";
        return 2;
      }
      qgroup.params_json = assemble_params(qgroup.params_json, qm, qr, qh, qgamma, qp);
      std::string key = "quotients|" + qgroup.name + "|" + qgroup.params_json + "|" +
                        std::to_string(qlevels);
      std::string bytes;
      if (auto hit = cache_lookup(key)) {
        bytes = *hit;
      } else {
        arbor::GroupSpec g = qgroup.resolve(run);
        arbor::IndexTable t = arbor::index_table(g.gens, qlevels, jobs);
        bytes = arbor::index_table_csv(t);
        cache_store(key, bytes);
      }
      run.emit("quotients.csv", bytes);
    } else if (c_hdim->parsed()) {
      run.subcommand = "hdim";
      if (hgroup.name.empty() && hgroup.file.empty()) {
        std::cerr << "{\"error\": \"hdim needs --group or --group-file\"}\n";
        return 2;
      }
      hgroup.params_json = assemble_params(hgroup.params_json, hm, hr, hh, hgamma, hp);
      arbor::GroupSpec g = hgroup.resolve(run);
      mpz_class h_order = arbor::quotient(g.gens, 1).order();
      arbor::WreathAmbient amb{g.m, h_order};
      arbor::SelfSimOptions opt;
      opt.jobs = jobs;
      arbor::Enclosure e = arbor::hdim_selfsimilar_enclosure(g.gens, amb, hlevels, opt);
      std::string bytes = arbor::enclosure_json(e) + "\n";
      if (hgroup.name == "sunic" && hr) {
        double bound = 1.0 - static_cast<double>(hr + 1) / std::pow(static_cast<double>(g.m),
                                                                    static_cast<double>(hr) - 1.0);
        bytes += "paper lower bound 1 - (r+1)/m^(r-1) = " + std::to_string(bound) + "\n";
      }
      run.emit("hdim.json", bytes);
    } else if (c_mu->parsed()) {
      run.subcommand = "mu";
      mpq_class gamma = arbor::parse_rational(mu_target);
      arbor::AntichainSchema sch = arbor::antichain_for_target(gamma, mu_m);
      arbor::Antichain prefix = sch.prefix_below(mu_depth);
      arbor::MuInterval mi = arbor::mu(arbor::WeightedAntichain(sch), mu_depth);
      nlohmann::ordered_json j;
      j["target"] = gamma.get_str();
      j["antichain"] = nlohmann::ordered_json::parse(prefix.to_json());
      j["mu"] = {{"lo", mi.lo.get_str()}, {"hi", mi.hi.get_str()}};
      j["exact"] = mi.exact();
      run.emit("mu.json", j.dump(2) + "\n");
    } else if (c_filt->parsed()) {
      run.subcommand = "grig-filt";
      std::string key = "grig-filt|" + std::to_string(f_max_m) + "|" + std::to_string(f_level);
      std::string bytes;
      if (auto hit = cache_lookup(key)) {
        bytes = *hit;
      } else {
        arbor::CrosscheckReport rep = arbor::empirical_crosscheck(f_max_m, f_level);
        bytes = arbor::filt_csv(rep, f_max_m);
        cache_store(key, bytes);
      }
      run.emit("grig-filt.csv", bytes);
    } else if (c_verify->parsed()) {
      run.subcommand = "verify";
      auto results = arbor::run_acceptance();
      int failures = arbor::report_acceptance(results);
      run.write_manifest();
      return failures == 0 ? 0 : 1;
    }
    run.write_manifest();
    return 0;
  } catch (const std::exception& e) {
    nlohmann::ordered_json j;
    j["error"] = e.what();
    j["subcommand"] = run.subcommand;
    std::cerr << j.dump() << "\n";
    return 1;
  }
}
