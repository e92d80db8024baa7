#include "densedepth/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace densedepth {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> known,
                const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) ok = true;
    if (!ok) throw Error("unknown config key: " + section + it.key());
  }
}

template <typename T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string PipelineConfig::canonical_string() const {
  std::ostringstream ss;
  ss.precision(17);
  ss << "ground:" << ground.s << "," << ground.l << "," << ground.r_seed << ","
     << ground.k_nn << "," << ground.alpha_deg << "," << ground.delta
     << ";kf:" << keyframes.d_fine << "," << keyframes.R_fine << ","
     << keyframes.d_coarse << "," << keyframes.R_coarse
     << ";vote:" << voting.dphi << "," << voting.dtheta << "," << voting.tau << ","
     << voting.w
     << ";render:" << render.d_min << "," << render.d_max << "," << render.d_step
     << "," << render.d_crop << "," << render.sigma_min << "," << render.sigma_max
     << "," << render.sigma_min_dyn << "," << render.sigma_max_dyn << ","
     << render.elongation << ";seed:" << seed;
  return ss.str();
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("malformed config: " + std::string(e.what()));
  }

  PipelineConfig c;
  check_keys(j, {"ground", "keyframes", "voting", "render", "workers", "seed",
                 "key_image_cache", "outputs"},
             "");

  if (j.contains("ground")) {
    const json& g = j["ground"];
    check_keys(g, {"s", "l", "r_seed", "k_nn", "alpha", "delta"}, "ground.");
    get(g, "s", c.ground.s);
    get(g, "l", c.ground.l);
    get(g, "r_seed", c.ground.r_seed);
    get(g, "k_nn", c.ground.k_nn);
    get(g, "alpha", c.ground.alpha_deg);
    get(g, "delta", c.ground.delta);
  }
  if (j.contains("keyframes")) {
    const json& k = j["keyframes"];
    check_keys(k, {"d_fine", "R_fine", "d_coarse", "R_coarse"}, "keyframes.");
    get(k, "d_fine", c.keyframes.d_fine);
    get(k, "R_fine", c.keyframes.R_fine);
    get(k, "d_coarse", c.keyframes.d_coarse);
    get(k, "R_coarse", c.keyframes.R_coarse);
  }
  if (j.contains("voting")) {
    const json& v = j["voting"];
    check_keys(v, {"dphi_deg", "dtheta_deg", "tau", "w"}, "voting.");
    double dphi_deg = rad2deg(c.voting.dphi), dtheta_deg = rad2deg(c.voting.dtheta);
    get(v, "dphi_deg", dphi_deg);
    get(v, "dtheta_deg", dtheta_deg);
    c.voting.dphi = deg2rad(dphi_deg);
    c.voting.dtheta = deg2rad(dtheta_deg);
    get(v, "tau", c.voting.tau);
    get(v, "w", c.voting.w);
  }
  if (j.contains("render")) {
    const json& r = j["render"];
    check_keys(r,
               {"d_min", "d_max", "d_step", "d_crop", "sigma_min", "sigma_max",
                "sigma_min_dyn", "sigma_max_dyn", "elongation"},
               "render.");
    get(r, "d_min", c.render.d_min);
    get(r, "d_max", c.render.d_max);
    get(r, "d_step", c.render.d_step);
    get(r, "d_crop", c.render.d_crop);
    get(r, "sigma_min", c.render.sigma_min);
    get(r, "sigma_max", c.render.sigma_max);
    get(r, "sigma_min_dyn", c.render.sigma_min_dyn);
    get(r, "sigma_max_dyn", c.render.sigma_max_dyn);
    get(r, "elongation", c.render.elongation);
  }
  get(j, "workers", c.workers);
  get(j, "seed", c.seed);
  get(j, "key_image_cache", c.key_image_cache);
  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    check_keys(o, {"png", "f32", "preview"}, "outputs.");
    get(o, "png", c.write_png);
    get(o, "f32", c.write_f32);
    get(o, "preview", c.write_preview);
  }
  c.validate();
  return c;
}

void save_config(const std::filesystem::path& path, const PipelineConfig& c) {
  json j;
  j["ground"] = {{"s", c.ground.s},       {"l", c.ground.l},
                 {"r_seed", c.ground.r_seed}, {"k_nn", c.ground.k_nn},
                 {"alpha", c.ground.alpha_deg}, {"delta", c.ground.delta}};
  j["keyframes"] = {{"d_fine", c.keyframes.d_fine},
                    {"R_fine", c.keyframes.R_fine},
                    {"d_coarse", c.keyframes.d_coarse},
                    {"R_coarse", c.keyframes.R_coarse}};
  j["voting"] = {{"dphi_deg", rad2deg(c.voting.dphi)},
                 {"dtheta_deg", rad2deg(c.voting.dtheta)},
                 {"tau", c.voting.tau},
                 {"w", c.voting.w}};
  j["render"] = {{"d_min", c.render.d_min},
                 {"d_max", c.render.d_max},
                 {"d_step", c.render.d_step},
                 {"d_crop", c.render.d_crop},
                 {"sigma_min", c.render.sigma_min},
                 {"sigma_max", c.render.sigma_max},
                 {"sigma_min_dyn", c.render.sigma_min_dyn},
                 {"sigma_max_dyn", c.render.sigma_max_dyn},
                 {"elongation", c.render.elongation}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  j["key_image_cache"] = c.key_image_cache;
  j["outputs"] = {{"png", c.write_png}, {"f32", c.write_f32}, {"preview", c.write_preview}};

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace densedepth
