#include "qdm/io.hpp"

#include <bit>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace qdm {

namespace fs = std::filesystem;

void atomic_write(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ValidationError("cannot write to '" + tmp.string() + "'");
    writer(os);
    os.flush();
    if (!os) throw ValidationError("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "QDMR1 payload is little-endian; add byte swapping for this platform");

std::string fmt_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string next_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line))
    throw ValidationError(std::string("unexpected end of file reading ") + what);
  return line;
}

// "key value..." line; returns the value part, validating the key.
std::string keyed(std::istream& is, const std::string& key) {
  const std::string line = next_line(is, key.c_str());
  if (line.rfind(key + " ", 0) != 0)
    throw ValidationError("malformed header line '" + line + "', expected key '" + key + "'");
  return line.substr(key.size() + 1);
}

}  // namespace

void write_raster_stream(std::ostream& os, const ScalarRaster& r) {
  r.validate();
  os << "QDMR1\n";
  os << "nx " << r.grid.nx << "\n";
  os << "ny " << r.grid.ny << "\n";
  os << "pitch_m " << fmt_double(r.grid.pitch) << "\n";
  os << "origin_m " << fmt_double(r.grid.origin.x()) << " "
     << fmt_double(r.grid.origin.y()) << "\n";
  os << "unit " << unit_name(r.unit) << "\n";
  os << "layout row-major-y-outer-x-inner\n";
  os << "data " << r.grid.npixels() << "\n";
  // column-major (nx, ny) buffer == row-major y-outer x-inner file order
  os.write(reinterpret_cast<const char*>(r.values.data()),
           static_cast<std::streamsize>(sizeof(double) * r.grid.npixels()));
}

ScalarRaster read_raster_stream(std::istream& is) {
  if (next_line(is, "magic") != "QDMR1") throw ValidationError("not a QDMR1 raster");
  Grid2D grid;
  grid.nx = std::stoi(keyed(is, "nx"));
  grid.ny = std::stoi(keyed(is, "ny"));
  grid.pitch = std::stod(keyed(is, "pitch_m"));
  {
    std::istringstream o(keyed(is, "origin_m"));
    o >> grid.origin.x() >> grid.origin.y();
    if (!o) throw ValidationError("QDMR1: malformed origin");
  }
  const Unit unit = unit_from_name(keyed(is, "unit"));
  if (keyed(is, "layout") != "row-major-y-outer-x-inner")
    throw ValidationError("QDMR1: unsupported layout");
  const long count = std::stol(keyed(is, "data"));
  grid.validate();
  if (count != grid.npixels()) throw ValidationError("QDMR1: data count mismatch");
  Eigen::ArrayXXd values(grid.nx, grid.ny);
  is.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(sizeof(double) * count));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(double) * count))
    throw ValidationError("QDMR1: truncated payload");
  return ScalarRaster(grid, unit, std::move(values));
}

void write_raster(const fs::path& path, const ScalarRaster& r) {
  atomic_write(path, [&](std::ostream& os) { write_raster_stream(os, r); });
}

ScalarRaster read_raster(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open raster file '" + path.string() + "'");
  return read_raster_stream(is);
}

void write_stack(const fs::path& path, const OdmrStack& s) {
  s.validate();
  atomic_write(path, [&](std::ostream& os) {
    os << "QDMS1\n";
    os << "branch " << branch_name(s.branch) << "\n";
    os << "n_f " << s.n_freqs() << "\n";
    os << "freqs_mhz";
    for (int i = 0; i < s.n_freqs(); ++i) os << " " << fmt_double(s.freqs_mhz[i]);
    os << "\n";
    os << "sweeps_averaged " << s.sweeps_averaged << "\n";
    for (const auto& w : s.warnings) os << "warning " << w << "\n";
    os << "rasters " << s.n_freqs() << "\n";
    for (int f = 0; f < s.n_freqs(); ++f) {
      Eigen::ArrayXXd frame(s.grid.nx, s.grid.ny);
      Eigen::Map<Eigen::ArrayXd>(frame.data(), s.grid.npixels()) =
          s.frames.row(f).transpose();
      write_raster_stream(os, ScalarRaster(s.grid, Unit::Dimensionless, std::move(frame)));
    }
  });
}

OdmrStack read_stack(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open stack file '" + path.string() + "'");
  if (next_line(is, "magic") != "QDMS1") throw ValidationError("not a QDMS1 stack");

  OdmrStack s;
  const std::string br = keyed(is, "branch");
  if (br == "f_minus") s.branch = OdmrBranch::FMinus;
  else if (br == "f_plus") s.branch = OdmrBranch::FPlus;
  else throw ValidationError("QDMS1: unknown branch '" + br + "'");

  const int nf = std::stoi(keyed(is, "n_f"));
  require(nf >= 5, "QDMS1: n_f must be >= 5");
  {
    std::istringstream fr(keyed(is, "freqs_mhz"));
    s.freqs_mhz.resize(nf);
    for (int i = 0; i < nf; ++i) fr >> s.freqs_mhz[i];
    if (!fr) throw ValidationError("QDMS1: malformed frequency list");
  }
  std::string line = next_line(is, "sweeps_averaged");
  if (line.rfind("sweeps_averaged ", 0) != 0)
    throw ValidationError("QDMS1: expected sweeps_averaged");
  s.sweeps_averaged = std::stoi(line.substr(16));
  line = next_line(is, "rasters");
  while (line.rfind("warning ", 0) == 0) {
    s.warnings.push_back(line.substr(8));
    line = next_line(is, "rasters");
  }
  if (line != "rasters " + std::to_string(nf))
    throw ValidationError("QDMS1: raster count mismatch");

  for (int f = 0; f < nf; ++f) {
    ScalarRaster frame = read_raster_stream(is);
    if (f == 0) {
      s.grid = frame.grid;
      s.frames.resize(nf, s.grid.npixels());
    } else {
      require(frame.grid.same_as(s.grid), "QDMS1: frame grids differ");
    }
    s.frames.row(f) = Eigen::Map<const Eigen::ArrayXd>(frame.values.data(),
                                                       s.grid.npixels()).transpose();
  }
  s.validate();
  return s;
}

void write_transect_csv(const fs::path& path, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& b) {
  require(x.size() == b.size(), "write_transect_csv: length mismatch");
  atomic_write(path, [&](std::ostream& os) {
    os << "x_m,b_tesla\n";
    for (int i = 0; i < x.size(); ++i)
      os << fmt_double(x[i]) << "," << fmt_double(b[i]) << "\n";
  });
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> read_transect_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open transect file '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line) || line != "x_m,b_tesla")
    throw ValidationError("transect CSV must start with header 'x_m,b_tesla'");
  std::vector<double> xs, bs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ValidationError("malformed transect row '" + line + "'");
    xs.push_back(std::stod(line.substr(0, comma)));
    bs.push_back(std::stod(line.substr(comma + 1)));
  }
  Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), xs.size());
  Eigen::VectorXd b = Eigen::Map<Eigen::VectorXd>(bs.data(), bs.size());
  return {x, b};
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty() || s == "-") return std::nullopt;
  return std::stod(s);
}

}  // namespace

std::map<std::string, ExternalRef> read_refs_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open references file '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line) || split_csv(line) !=
      std::vector<std::string>{"tap", "simulation_A", "conventional_A"})
    throw ValidationError("references CSV must start with 'tap,simulation_A,conventional_A'");
  std::map<std::string, ExternalRef> refs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 3) throw ValidationError("malformed references row '" + line + "'");
    refs[f[0]] = ExternalRef{parse_opt(f[1]), parse_opt(f[2])};
  }
  return refs;
}

void write_report_csv(const fs::path& path, const std::vector<ComparisonRow>& rows) {
  atomic_write(path, [&](std::ostream& os) {
    os << "tap,expected_A,simulation_A,conventional_A,qdm_A,"
          "pct_error_vs_conventional,pct_error_vs_expected\n";
    auto opt = [&](const std::optional<double>& v) {
      return v ? fmt_double(*v) : std::string();
    };
    for (const auto& r : rows) {
      os << r.tap << "," << fmt_double(r.expected) << "," << opt(r.reference) << ","
         << opt(r.conventional) << "," << fmt_double(r.qdm) << ","
         << opt(r.pct_error_vs_conventional) << ","
         << opt(r.pct_error_vs_expected) << "\n";
    }
  });
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qdm
