#include "weightlab/error.hpp"
#include "weightlab/operators.hpp"

namespace weightlab {

OperatorHandle OperatorHandle::maximal(MaximalVariant variant) {
  return {"maximal", false,
          [v = std::move(variant)](const GridFunction& f) { return to_complex(weightlab::maximal(f, v)); }};
}

OperatorHandle OperatorHandle::truncated(KernelSpec kernel, double eps) {
  return {"truncated:" + kernel.name, true, [k = std::move(kernel), eps](const GridFunction& f) {
            return to_complex(truncated_singular(f, k, eps));
          }};
}

OperatorHandle OperatorHandle::maximal_singular(KernelSpec kernel) {
  return {"tstar:" + kernel.name, false, [k = std::move(kernel)](const GridFunction& f) {
            return to_complex(weightlab::maximal_singular(f, k, dyadic_ladder(f.grid())));
          }};
}

OperatorHandle OperatorHandle::strong(StrongKernelParams params) {
  return {params.cho_yang() ? "choyang" : "strong", true,
          [p = std::move(params)](const GridFunction& f) { return strongly_singular(f, p); }};
}

OperatorHandle OperatorHandle::pseudo(SymbolSpec symbol) {
  return {"pseudo:" + symbol.name, true,
          [s = std::move(symbol)](const GridFunction& f) { return pseudo_differential(f, s); }};
}

ComplexGridFunction commutator(const GridFunction& b, const OperatorHandle& op, const GridFunction& f) {
  if (!op.linear) throw UnsupportedError("commutator requires a linear operator, got " + op.name);
  require_same_grid(b.grid(), f.grid(), "commutator");
  GridFunction bf(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) bf[k] = b[k] * f[k];
  auto tf = op.apply(f);
  auto tbf = op.apply(bf);
  ComplexGridFunction out(f.grid());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = b[k] * tf[k] - tbf[k];
  return out;
}

}  // namespace weightlab
