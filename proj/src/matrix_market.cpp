#include "bilyap/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

namespace bilyap::mm {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string next_data_line(std::istream& in) {
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return line;
  }
  return {};
}

}  // namespace

MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw std::runtime_error(path.string() + ": not a MatrixMarket matrix file");
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double")
    throw std::runtime_error(path.string() + ": unsupported field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric")
    throw std::runtime_error(path.string() + ": unsupported symmetry '" + symmetry + "'");

  std::istringstream sizes(next_data_line(in));
  if (format == "array") {
    Eigen::Index rows = 0, cols = 0;
    sizes >> rows >> cols;
    if (rows <= 0 || cols <= 0) throw std::runtime_error(path.string() + ": bad size line");
    MatrixXd X(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Eigen::Index i0 = (symmetry == "symmetric") ? j : 0;
      for (Eigen::Index i = i0; i < rows; ++i) {
        std::istringstream v(next_data_line(in));
        double value = 0.0;
        if (!(v >> value)) throw std::runtime_error(path.string() + ": truncated array data");
        X(i, j) = value;
        if (symmetry == "symmetric") X(j, i) = value;
      }
    }
    return X;
  }
  if (format == "coordinate") {
    Eigen::Index rows = 0, cols = 0;
    long long nnz = 0;
    sizes >> rows >> cols >> nnz;
    if (rows <= 0 || cols <= 0 || nnz < 0) throw std::runtime_error(path.string() + ": bad size line");
    MatrixXd X = MatrixXd::Zero(rows, cols);
    for (long long e = 0; e < nnz; ++e) {
      std::istringstream v(next_data_line(in));
      Eigen::Index i = 0, j = 0;
      double value = 0.0;
      if (!(v >> i >> j >> value)) throw std::runtime_error(path.string() + ": truncated coordinate data");
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw std::runtime_error(path.string() + ": index out of range");
      X(i - 1, j - 1) = value;
      if (symmetry == "symmetric") X(j - 1, i - 1) = value;
    }
    return X;
  }
  throw std::runtime_error(path.string() + ": unsupported format '" + format + "'");
}

void write_matrix(const std::filesystem::path& path, const MatrixXd& X, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "%%MatrixMarket matrix array real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << X.rows() << " " << X.cols() << "\n";
  char buf[40];
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", X(i, j));
      out << buf << "\n";
    }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_system(const std::filesystem::path& dir, const BilinearSystem& sys) {
  std::filesystem::create_directories(dir);
  std::ofstream man(dir / "system.manifest");
  if (!man) throw std::runtime_error("cannot write manifest in " + dir.string());
  man << "bilinear-system\n";
  man << "n " << sys.n() << "\n";
  man << "m " << sys.m() << "\n";
  man << "r " << sys.r() << "\n";
  man << "symmetric " << (sys.symmetric() ? 1 : 0) << "\n";
  write_matrix(dir / "A.mtx", sys.A());
  man << "A A.mtx\n";
  for (Eigen::Index i = 0; i < sys.m(); ++i) {
    const std::string name = "N_" + std::to_string(i + 1) + ".mtx";
    write_matrix(dir / name, sys.N(static_cast<std::size_t>(i)));
    man << "N " << name << "\n";
  }
  write_matrix(dir / "B.mtx", sys.B());
  man << "B B.mtx\n";
  if (sys.has_output() && !sys.symmetric()) {
    write_matrix(dir / "C.mtx", sys.output_matrix());
    man << "C C.mtx\n";
  }
}

BilinearSystem read_system(const std::filesystem::path& dir) {
  std::ifstream man(dir / "system.manifest");
  if (!man) throw std::runtime_error("cannot open manifest in " + dir.string());
  std::string line;
  std::getline(man, line);
  if (line.rfind("bilinear-system", 0) != 0)
    throw std::runtime_error(dir.string() + ": not a bilinear system manifest");

  Eigen::Index n = -1, m = -1, r = -1;
  bool symmetric = false;
  std::optional<MatrixXd> A, B, C;
  std::vector<MatrixXd> N;
  while (std::getline(man, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    if (key == "n") ls >> n;
    else if (key == "m") ls >> m;
    else if (key == "r") ls >> r;
    else if (key == "symmetric") { int v = 0; ls >> v; symmetric = (v != 0); }
    else if (key == "A" || key == "B" || key == "C" || key == "N") {
      std::string file;
      if (!(ls >> file)) throw std::runtime_error(dir.string() + ": manifest entry without file");
      MatrixXd X = read_matrix(dir / file);
      if (key == "A") A = std::move(X);
      else if (key == "B") B = std::move(X);
      else if (key == "C") C = std::move(X);
      else N.push_back(std::move(X));
    } else {
      throw std::runtime_error(dir.string() + ": unknown manifest key '" + key + "'");
    }
  }
  if (!A || !B) throw std::runtime_error(dir.string() + ": manifest must list A and B");
  if (n >= 0 && A->rows() != n) throw std::runtime_error(dir.string() + ": A does not match declared n");
  if (m >= 0 && static_cast<Eigen::Index>(N.size()) != m)
    throw std::runtime_error(dir.string() + ": N count does not match declared m");
  if (r >= 0 && B->cols() != r) throw std::runtime_error(dir.string() + ": B does not match declared r");
  return BilinearSystem(std::move(*A), std::move(N), std::move(*B), std::move(C), symmetric);
}

}  // namespace bilyap::mm
