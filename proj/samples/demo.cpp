// Kernel spectrum and bounds for a small residual network on random data.

#include <iostream>

#include "ntknas/ntknas.hpp"

int main() {
  using namespace ntknas;
  SynthSpec spec;
  spec.N = 48;
  spec.d = 8;
  spec.seed = 7;
  const Dataset data = generate(spec);

  const Architecture arch = make_architecture(
      {ActivationKind::relu(), ActivationKind::tanh(), ActivationKind::swish()}, {1, 0}, 64, 8);
  const KernelStack st = ntk_infinite(data.X, arch);
  const double lam = min_eigenvalue(st.K);

  std::cout << "architecture  " << encode_activations(arch) << " skips " << encode_skips(arch)
            << "\n";
  std::cout << "lambda_min    " << lam << "\n";
  std::cout << "trace / d     " << trace_over_d(st.K, 8) << "\n";
  std::cout << "frobenius     " << frobenius(st.K) << "\n";

  const BoundReport r = make_bound_report(arch, 48, 8);
  std::cout << "thm1 bounds   [" << r.lower_thm1 << ", " << r.upper_thm1 << "]"
            << (r.prop4.vacuous ? " (lower bound vacuous at this N, d)" : "") << "\n";

  const Params p = init(arch, Convention::paper_init, 1);
  std::cout << "empirical tr/d " << grad_norm_diag(p, arch, data.X).sum() / 8 << "\n";
  return 0;
}
