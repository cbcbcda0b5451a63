#include "decdim/class_io.hpp"

#include <fstream>
#include <sstream>

namespace decdim {
namespace {

using nlohmann::json;

Vector ToVector(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected an array of numbers");
  Vector v(Index(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError(what + ": expected a number at index " + std::to_string(i));
    v[Index(i)] = j[i].get<double>();
  }
  return v;
}

json FromVector(const Vector& v) {
  json j = json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Emission ParseEmission(const json& j, const ObservationSpace& space, const std::string& where) {
  switch (space.kind) {
    case ObservationKind::kFinite:
      return FiniteEmission(ToVector(j, where));
    case ObservationKind::kGaussian:
      if (!j.is_number()) throw InputError(where + ": gaussian channel needs a mean");
      return GaussianEmission(j.get<double>());
    case ObservationKind::kContextGaussian: {
      if (!j.is_object() || !j.contains("contexts") || !j.contains("means")) {
        throw InputError(where + ": contextual channel needs {contexts, means}");
      }
      Emission e;
      e.tag_probs = ToVector(j["contexts"], where);
      const Vector means = ToVector(j["means"], where);
      if (means.size() != e.tag_probs.size()) throw InputError(where + ": contexts/means length mismatch");
      for (Index c = 0; c < means.size(); ++c) e.reward_mix.push_back({GaussianComponent{1.0, means[c]}});
      return e;
    }
  }
  throw InputError(where + ": unsupported observation space");
}

json EmissionJson(const Emission& e, const ObservationSpace& space) {
  if (space.kind == ObservationKind::kFinite) return FromVector(e.tag_probs);
  for (const auto& mix : e.reward_mix) {
    if (mix.size() != 1) throw InputError("Gaussian mixture channels are not representable in decdim/v1");
  }
  if (space.kind == ObservationKind::kGaussian) return e.reward_mix[0][0].mean;
  json means = json::array();
  for (const auto& mix : e.reward_mix) means.push_back(mix[0].mean);
  return json{{"contexts", FromVector(e.tag_probs)}, {"means", means}};
}

std::vector<Emission> ParseChannel(const json& j, const ModelClass& cls, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": channel must be an object keyed by decision");
  std::vector<Emission> channel;
  for (const auto& d : cls.decisions) {
    if (!j.contains(d)) throw InputError(where + ": channel lacks decision '" + d + "'");
    channel.push_back(ParseEmission(j[d], cls.observations, where + " decision '" + d + "'"));
  }
  if (j.size() != cls.decisions.size()) throw InputError(where + ": channel names unknown decisions");
  return channel;
}

json ChannelJson(const std::vector<Emission>& channel, const ModelClass& cls) {
  json j = json::object();
  for (size_t d = 0; d < cls.decisions.size(); ++d) {
    j[cls.decisions[d]] = EmissionJson(channel[d], cls.observations);
  }
  return j;
}

}  // namespace

ModelClass ClassFromJson(const json& doc) {
  if (!doc.is_object()) throw InputError("class file: top level must be an object");
  if (doc.value("version", std::string()) != kSchemaVersion) {
    throw InputError(std::string("class file: version must be '") + kSchemaVersion + "'");
  }
  for (const char* key : {"decisions", "observations", "risk_mode", "models"}) {
    if (!doc.contains(key)) throw InputError(std::string("class file: missing '") + key + "'");
  }
  ModelClass cls;
  for (const auto& d : doc["decisions"]) {
    if (!d.is_string()) throw InputError("class file: decision names must be strings");
    cls.decisions.push_back(d.get<std::string>());
  }
  const json& obs = doc["observations"];
  if (obs.is_string()) {
    if (obs.get<std::string>() != "gaussian") throw InputError("class file: observations must be a list or \"gaussian\"");
    cls.observations.kind = ObservationKind::kGaussian;
    cls.observations.tags = {"reward"};
  } else if (obs.is_array()) {
    for (const auto& o : obs) cls.observations.tags.push_back(o.get<std::string>());
    if (!doc.contains("reward")) throw InputError("class file: finite observations need a reward map");
    cls.observations.reward = ToVector(doc["reward"], "reward");
  } else if (obs.is_object() && obs.contains("contexts")) {
    cls.observations.kind = ObservationKind::kContextGaussian;
    for (const auto& c : obs["contexts"]) cls.observations.tags.push_back(c.get<std::string>());
  } else {
    throw InputError("class file: unrecognized observations field");
  }
  if (!doc["risk_mode"].is_string()) throw InputError("class file: risk_mode must be a string");
  cls.risk_mode = ParseRiskMode(doc["risk_mode"].get<std::string>());
  if (doc.contains("lipschitz_lr")) cls.lipschitz_lr = doc["lipschitz_lr"].get<double>();
  if (!doc["models"].is_array()) throw InputError("class file: models must be an array");
  for (size_t i = 0; i < doc["models"].size(); ++i) {
    const json& mj = doc["models"][i];
    Model model;
    model.name = mj.value("name", "M" + std::to_string(i + 1));
    const std::string where = "model '" + model.name + "'";
    if (!mj.contains("channel")) throw InputError(where + ": missing channel");
    model.channel = ParseChannel(mj["channel"], cls, where);
    if (mj.contains("value")) model.value = ToVector(mj["value"], where + " value");
    if (mj.contains("risk")) model.risk = ToVector(mj["risk"], where + " risk");
    cls.models.push_back(std::move(model));
  }
  ValidateClass(cls);
  if (doc.contains("reference")) {
    const json& rj = doc["reference"];
    ReferenceModel ref;
    ref.model.name = "reference";
    ref.model.channel = ParseChannel(rj.at("channel"), cls, "reference");
    ref.c_kl = rj.at("c_kl").get<double>();
    if (cls.risk_mode == RiskMode::kRewardMax) {
      DeriveRewardMaxRisk(cls.observations, ref.model);
    } else {
      ref.model.risk = Vector::Zero(cls.num_decisions());
    }
    cls.reference = ref;
    ReferenceModelFor(cls);
  }
  return cls;
}

json ClassToJson(const ModelClass& cls) {
  json doc;
  doc["version"] = kSchemaVersion;
  doc["decisions"] = cls.decisions;
  switch (cls.observations.kind) {
    case ObservationKind::kFinite:
      doc["observations"] = cls.observations.tags;
      doc["reward"] = FromVector(cls.observations.reward);
      break;
    case ObservationKind::kGaussian:
      doc["observations"] = "gaussian";
      break;
    case ObservationKind::kContextGaussian:
      doc["observations"] = json{{"contexts", cls.observations.tags}, {"reward", "gaussian"}};
      break;
  }
  doc["risk_mode"] = ToString(cls.risk_mode);
  if (std::isfinite(cls.lipschitz_lr)) doc["lipschitz_lr"] = cls.lipschitz_lr;
  doc["models"] = json::array();
  for (const Model& m : cls.models) {
    json mj;
    mj["name"] = m.name;
    mj["channel"] = ChannelJson(m.channel, cls);
    if (m.value.size() > 0) mj["value"] = FromVector(m.value);
    if (cls.risk_mode != RiskMode::kRewardMax) mj["risk"] = FromVector(m.risk);
    doc["models"].push_back(mj);
  }
  if (cls.reference) {
    doc["reference"] = json{{"channel", ChannelJson(cls.reference->model.channel, cls)},
                            {"c_kl", cls.reference->c_kl}};
  }
  return doc;
}

ModelClass LoadClass(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open class file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("class file '" + path + "': " + e.what());
  }
  try {
    return ClassFromJson(doc);
  } catch (const json::exception& e) {
    throw InputError("class file '" + path + "': " + e.what());
  }
}

void SaveClass(const ModelClass& cls, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << ClassToJson(cls).dump(2) << "\n";
}

}  // namespace decdim
