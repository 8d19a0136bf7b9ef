#include "lossmetro/state_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "lossmetro/errors.hpp"

namespace lossmetro {

static_assert(std::endian::native == std::endian::little, "binary state files assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'L', 'M', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw ValidationError("truncated binary state file");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

std::int32_t role_code(ModeRole role) {
  switch (role) {
    case ModeRole::ancilla: return 0;
    case ModeRole::signal: return 1;
    case ModeRole::environment: return 2;
  }
  return -1;
}

ModeRole role_from_code(std::int32_t code) {
  switch (code) {
    case 0: return ModeRole::ancilla;
    case 1: return ModeRole::signal;
    case 2: return ModeRole::environment;
    default: throw ValidationError("bad mode role code in binary state file");
  }
}

}  // namespace

nlohmann::json layout_to_json(const ModeLayout& layout) {
  auto arr = nlohmann::json::array();
  for (const auto& m : layout.modes())
    arr.push_back({{"cutoff", m.cutoff}, {"role", to_string(m.role)}, {"element", m.element}});
  return arr;
}

ModeLayout layout_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ValidationError("layout must be an array of modes");
  std::vector<ModeSpec> specs;
  for (const auto& m : j) {
    ModeSpec spec;
    spec.cutoff = m.at("cutoff").get<int>();
    spec.role = mode_role_from_string(m.at("role").get<std::string>());
    spec.element = m.value("element", spec.role == ModeRole::ancilla ? -1 : 0);
    specs.push_back(spec);
  }
  return ModeLayout(std::move(specs));
}

nlohmann::json state_to_json(const PureState& psi) {
  auto amps = nlohmann::json::array();
  for (Eigen::Index i = 0; i < psi.amplitudes().size(); ++i)
    amps.push_back({psi.amplitudes()(i).real(), psi.amplitudes()(i).imag()});
  return {{"format", "lossmetro-state"},
          {"version", kVersion},
          {"layout", layout_to_json(psi.layout())},
          {"truncated_tail", psi.truncated_tail()},
          {"amplitudes", std::move(amps)}};
}

PureState state_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "lossmetro-state") throw ValidationError("not a lossmetro state document");
    ModeLayout layout = layout_from_json(j.at("layout"));
    const auto& arr = j.at("amplitudes");
    Vector amps(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i)
      amps(static_cast<Eigen::Index>(i)) = Complex(arr[i].at(0).get<double>(), arr[i].at(1).get<double>());
    return PureState::unchecked(std::move(layout), std::move(amps), j.value("truncated_tail", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed state JSON: ") + e.what());
  }
}

void write_state_binary(std::ostream& out, const PureState& psi) {
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(psi.layout().mode_count()));
  for (const auto& m : psi.layout().modes()) {
    put<std::int32_t>(out, m.cutoff);
    put<std::int32_t>(out, role_code(m.role));
    put<std::int32_t>(out, m.element);
  }
  put<double>(out, psi.truncated_tail());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(psi.amplitudes().size()));
  for (Eigen::Index i = 0; i < psi.amplitudes().size(); ++i) {
    put<double>(out, psi.amplitudes()(i).real());
    put<double>(out, psi.amplitudes()(i).imag());
  }
}

PureState read_state_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw ValidationError("not a binary lossmetro state file");
  if (get<std::uint32_t>(in) != kVersion) throw ValidationError("unsupported binary state version");
  const auto modes = get<std::uint32_t>(in);
  std::vector<ModeSpec> specs(modes);
  for (auto& spec : specs) {
    spec.cutoff = get<std::int32_t>(in);
    spec.role = role_from_code(get<std::int32_t>(in));
    spec.element = get<std::int32_t>(in);
  }
  ModeLayout layout(std::move(specs));
  const double tail = get<double>(in);
  const auto count = get<std::uint64_t>(in);
  if (count != layout.dimension()) throw ValidationError("amplitude count does not match the layout");
  Vector amps(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    const double re = get<double>(in);
    const double im = get<double>(in);
    amps(static_cast<Eigen::Index>(i)) = Complex(re, im);
  }
  return PureState::unchecked(std::move(layout), std::move(amps), tail);
}

void save_state(const std::string& path, const PureState& psi, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  if (binary) {
    write_state_binary(out, psi);
  } else {
    out << state_to_json(psi).dump(2) << '\n';
  }
}

PureState load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  char head[4] = {};
  in.read(head, 4);
  in.clear();
  in.seekg(0);
  if (std::memcmp(head, kMagic, 4) == 0) return read_state_binary(in);
  try {
    return state_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("cannot parse state file: ") + e.what());
  }
}

}  // namespace lossmetro
