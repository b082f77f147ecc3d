#include "sheaf/restriction.hpp"

#include <algorithm>
#include <mutex>
#include <unordered_map>

#include <fmt/format.h>

#include "sheaf/error.hpp"

namespace sheaf {

void register_standard_builtins();  // scenarios.cpp

namespace {

struct Catalog {
  std::mutex mu;
  std::unordered_map<std::string, BuiltinFactory> factories;
};

Catalog& catalog() {
  static Catalog c;
  return c;
}

void ensure_standard() {
  static std::once_flag once;
  std::call_once(once, [] { register_standard_builtins(); });
}

}  // namespace

void register_builtin(const std::string& name, BuiltinFactory factory) {
  auto& c = catalog();
  std::lock_guard lock(c.mu);
  c.factories[name] = std::move(factory);
}

bool has_builtin(const std::string& name) {
  ensure_standard();
  auto& c = catalog();
  std::lock_guard lock(c.mu);
  return c.factories.count(name) > 0;
}

std::vector<std::string> builtin_names() {
  ensure_standard();
  auto& c = catalog();
  std::lock_guard lock(c.mu);
  std::vector<std::string> out;
  for (const auto& [n, f] : c.factories) out.push_back(n);
  std::sort(out.begin(), out.end());
  return out;
}

struct RestrictionMap::Impl {
  Kind kind = Kind::Identity;
  std::size_t in = 0, out = 0;
  std::vector<std::size_t> indices;
  Matrix dense;
  SparseMatrix sparse;
  Vec offset;
  std::string name;
  Params params;
  BuiltinMap builtin;
  std::vector<RestrictionMap> parts;
  std::vector<Block> blocks;
  bool linear = true;
};

RestrictionMap::RestrictionMap() : impl_(std::make_shared<Impl>()) {}
RestrictionMap::RestrictionMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

RestrictionMap RestrictionMap::identity(std::size_t dim) {
  auto p = std::make_shared<Impl>();
  p->in = p->out = dim;
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::projection(std::vector<std::size_t> idx, std::size_t in_dim) {
  for (auto i : idx)
    if (i >= in_dim)
      throw Error(ErrorCode::SpaceMismatch,
                  fmt::format("projection index {} out of range for dimension {}", i, in_dim));
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Projection;
  p->in = in_dim;
  p->out = idx.size();
  p->indices = std::move(idx);
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::linear(Matrix m) {
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Linear;
  p->in = static_cast<std::size_t>(m.cols());
  p->out = static_cast<std::size_t>(m.rows());
  p->dense = std::move(m);
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::sparse(SparseMatrix m) {
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Sparse;
  p->in = static_cast<std::size_t>(m.cols());
  p->out = static_cast<std::size_t>(m.rows());
  m.makeCompressed();
  p->sparse = std::move(m);
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::affine(Matrix m, Vec offset) {
  if (offset.size() != m.rows())
    throw Error(ErrorCode::SpaceMismatch, "affine offset length differs from matrix rows");
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Affine;
  p->in = static_cast<std::size_t>(m.cols());
  p->out = static_cast<std::size_t>(m.rows());
  p->dense = std::move(m);
  p->offset = std::move(offset);
  p->linear = false;
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::builtin(const std::string& name, Params params) {
  ensure_standard();
  BuiltinFactory factory;
  {
    auto& c = catalog();
    std::lock_guard lock(c.mu);
    auto it = c.factories.find(name);
    if (it == c.factories.end())
      throw Error(ErrorCode::UnknownBuiltin, fmt::format("no builtin restriction named '{}'", name));
    factory = it->second;
  }
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Builtin;
  p->builtin = factory(params);
  p->in = p->builtin.in_dim;
  p->out = p->builtin.out_dim;
  p->name = name;
  p->params = std::move(params);
  p->linear = false;
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::composite(std::vector<RestrictionMap> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "empty composite restriction");
  if (parts.size() == 1) return parts.front();
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Composite;
  for (std::size_t i = 1; i < parts.size(); ++i)
    if (parts[i].in_dim() != parts[i - 1].out_dim())
      throw Error(ErrorCode::SpaceMismatch,
                  fmt::format("composite step {} expects {} coordinates but receives {}", i,
                              parts[i].in_dim(), parts[i - 1].out_dim()));
  p->in = parts.front().in_dim();
  p->out = parts.back().out_dim();
  for (const auto& q : parts) p->linear = p->linear && q.is_linear();
  p->parts = std::move(parts);
  return RestrictionMap(p);
}

RestrictionMap RestrictionMap::blocks(std::size_t in_dim, std::vector<Block> blocks) {
  auto p = std::make_shared<Impl>();
  p->kind = Kind::Blocks;
  p->in = in_dim;
  for (const auto& b : blocks) {
    if (b.offset + b.length > in_dim || b.map->in_dim() != b.length)
      throw Error(ErrorCode::SpaceMismatch, "block restriction does not fit its input slice");
    p->out += b.map->out_dim();
    p->linear = p->linear && b.map->is_linear();
  }
  p->blocks = std::move(blocks);
  return RestrictionMap(p);
}

RestrictionMap::Kind RestrictionMap::kind() const noexcept { return impl_->kind; }
std::size_t RestrictionMap::in_dim() const noexcept { return impl_->in; }
std::size_t RestrictionMap::out_dim() const noexcept { return impl_->out; }
bool RestrictionMap::is_linear() const noexcept { return impl_->linear; }

Vec RestrictionMap::apply(const Vec& x) const {
  const Impl& m = *impl_;
  if (static_cast<std::size_t>(x.size()) != m.in)
    throw Error(ErrorCode::SpaceMismatch,
                fmt::format("{} restriction expects {} coordinates, got {}", describe(), m.in, x.size()));
  switch (m.kind) {
    case Kind::Identity: return x;
    case Kind::Projection: {
      Vec y(static_cast<Eigen::Index>(m.out));
      for (std::size_t i = 0; i < m.out; ++i) y[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(m.indices[i])];
      return y;
    }
    case Kind::Linear: return m.dense * x;
    case Kind::Sparse: return m.sparse * x;
    case Kind::Affine: return m.dense * x + m.offset;
    case Kind::Builtin: {
      Vec y = m.builtin.fn(x);
      if (static_cast<std::size_t>(y.size()) != m.out)
        throw Error(ErrorCode::SpaceMismatch, fmt::format("builtin {} returned wrong dimension", m.name));
      return y;
    }
    case Kind::Composite: {
      Vec y = x;
      for (const auto& p : m.parts) y = p.apply(y);
      return y;
    }
    case Kind::Blocks: {
      Vec y(static_cast<Eigen::Index>(m.out));
      Eigen::Index at = 0;
      for (const auto& b : m.blocks) {
        Vec part = b.map->apply(x.segment(static_cast<Eigen::Index>(b.offset), static_cast<Eigen::Index>(b.length)));
        y.segment(at, part.size()) = part;
        at += part.size();
      }
      return y;
    }
  }
  return x;
}

Matrix RestrictionMap::matrix() const {
  const Impl& m = *impl_;
  if (!m.linear)
    throw Error(ErrorCode::NonlinearSheaf, fmt::format("{} restriction is not linear", describe()));
  const auto in = static_cast<Eigen::Index>(m.in), out = static_cast<Eigen::Index>(m.out);
  switch (m.kind) {
    case Kind::Identity: return Matrix::Identity(in, in);
    case Kind::Projection: {
      Matrix p = Matrix::Zero(out, in);
      for (std::size_t i = 0; i < m.out; ++i) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.indices[i])) = 1.0;
      return p;
    }
    case Kind::Linear: return m.dense;
    case Kind::Sparse: return Matrix(m.sparse);
    case Kind::Composite: {
      Matrix acc = m.parts.front().matrix();
      for (std::size_t i = 1; i < m.parts.size(); ++i) acc = m.parts[i].matrix() * acc;
      return acc;
    }
    case Kind::Blocks: {
      Matrix r = Matrix::Zero(out, in);
      Eigen::Index at = 0;
      for (const auto& b : m.blocks) {
        Matrix part = b.map->matrix();
        r.block(at, static_cast<Eigen::Index>(b.offset), part.rows(), part.cols()) = part;
        at += part.rows();
      }
      return r;
    }
    default: break;
  }
  throw Error(ErrorCode::NonlinearSheaf, "restriction is not linear");
}

SparseMatrix RestrictionMap::sparse_matrix() const {
  const Impl& m = *impl_;
  if (!m.linear)
    throw Error(ErrorCode::NonlinearSheaf, fmt::format("{} restriction is not linear", describe()));
  const auto in = static_cast<Eigen::Index>(m.in), out = static_cast<Eigen::Index>(m.out);
  switch (m.kind) {
    case Kind::Identity: {
      SparseMatrix s(in, in);
      s.setIdentity();
      return s;
    }
    case Kind::Projection: {
      std::vector<Eigen::Triplet<double>> t;
      for (std::size_t i = 0; i < m.out; ++i)
        t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.indices[i]), 1.0);
      SparseMatrix s(out, in);
      s.setFromTriplets(t.begin(), t.end());
      return s;
    }
    case Kind::Sparse: return m.sparse;
    case Kind::Composite: {
      SparseMatrix acc = m.parts.front().sparse_matrix();
      for (std::size_t i = 1; i < m.parts.size(); ++i) acc = (m.parts[i].sparse_matrix() * acc).pruned();
      return acc;
    }
    case Kind::Blocks: {
      std::vector<Eigen::Triplet<double>> t;
      Eigen::Index at = 0;
      for (const auto& b : m.blocks) {
        SparseMatrix part = b.map->sparse_matrix();
        for (Eigen::Index k = 0; k < part.outerSize(); ++k)
          for (SparseMatrix::InnerIterator it(part, k); it; ++it)
            t.emplace_back(at + it.row(), static_cast<Eigen::Index>(b.offset) + it.col(), it.value());
        at += part.rows();
      }
      SparseMatrix s(out, in);
      s.setFromTriplets(t.begin(), t.end());
      return s;
    }
    default: return to_sparse(matrix());
  }
}

const std::vector<std::size_t>& RestrictionMap::indices() const { return impl_->indices; }
const Matrix& RestrictionMap::dense() const { return impl_->dense; }
const Vec& RestrictionMap::offset() const { return impl_->offset; }
const std::string& RestrictionMap::builtin_name() const { return impl_->name; }
const Params& RestrictionMap::params() const { return impl_->params; }
const std::vector<RestrictionMap>& RestrictionMap::parts() const { return impl_->parts; }
const std::vector<RestrictionMap::Block>& RestrictionMap::block_list() const { return impl_->blocks; }

std::string RestrictionMap::describe() const {
  const Impl& m = *impl_;
  switch (m.kind) {
    case Kind::Identity: return fmt::format("identity({})", m.in);
    case Kind::Projection: return fmt::format("projection[{}]", fmt::join(m.indices, ","));
    case Kind::Linear: return fmt::format("linear({}x{})", m.out, m.in);
    case Kind::Sparse: return fmt::format("sparse({}x{})", m.out, m.in);
    case Kind::Affine: return fmt::format("affine({}x{})", m.out, m.in);
    case Kind::Builtin: return fmt::format("builtin {}", m.name);
    case Kind::Composite: {
      std::vector<std::string> p;
      for (const auto& q : m.parts) p.push_back(q.describe());
      return fmt::format("({})", fmt::join(p, " then "));
    }
    case Kind::Blocks: return fmt::format("blocks({})", m.blocks.size());
  }
  return "?";
}

}  // namespace sheaf
