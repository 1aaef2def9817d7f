#include "lqrpg/presets.hpp"

namespace lqrpg {

Preset preset_scalar() {
  Matrix a(1, 1), b(1, 1), q(1, 1), r(1, 1), one(1, 1);
  a << 0.5;
  b << 1.0;
  q << 1.0;
  r << 1.0;
  one << 1.0;
  LinearSystem sys(a, b, SymmetricPsd(one), SymmetricPsd(one),
                   SymmetricPsd(one));
  LqrCost cost{SymmetricPsd(q), SymmetricPsd(r)};
  return Preset{std::move(sys), std::move(cost), Gain{Matrix::Zero(1, 1)}};
}

Preset preset_benchmark3(double sigma_w_scale) {
  Matrix a(3, 3);
  a << 1.01, 0.01, 0.00,  //
      0.01, 1.01, 0.01,   //
      0.00, 0.01, 1.01;
  Matrix b = Matrix::Identity(3, 3);
  SymmetricPsd q(0.001 * Matrix::Identity(3, 3));
  SymmetricPsd r(Matrix::Identity(3, 3));
  LinearSystem sys(a, b, SymmetricPsd(sigma_w_scale * Matrix::Identity(3, 3)),
                   SymmetricPsd(0.1 * Matrix::Identity(3, 3)),
                   SymmetricPsd(Matrix::Identity(3, 3)));
  // Evaluation gain: optimum of the reweighted problem (A, B, 50Q, R).
  DareSolution d = solve_dare(a, b, 50.0 * q.mat(), r.mat());
  LqrCost cost{std::move(q), std::move(r)};
  return Preset{std::move(sys), std::move(cost), Gain{d.K}};
}

Preset preset_boeing747() {
  Matrix a(5, 5);
  a << 1.00, -1.13, -0.65, -0.807, 1.59,  //
      0.00, 0.77, 0.32, -0.98, -2.97,     //
      0.00, 0.12, 0.02, 0.00, -0.36,      //
      0.00, 0.01, 0.01, -0.03, -0.04,     //
      0.00, 0.14, -0.09, 0.29, 0.76;
  Matrix b(5, 4);
  b << 89.20, -50.17, 1.13, -19.35,  //
      5.22, 6.36, 0.23, -0.32,       //
      -9.47, 5.93, -0.12, 0.99,      //
      -0.32, 0.32, -0.01, -0.01,     //
      -4.53, 3.21, -0.14, 0.09;
  SymmetricPsd q(Matrix::Identity(5, 5));
  SymmetricPsd r(Matrix::Identity(4, 4));
  LinearSystem sys(a, b, SymmetricPsd(1e-3 * Matrix::Identity(5, 5)),
                   SymmetricPsd(1e-6 * Matrix::Identity(5, 5)),
                   SymmetricPsd(Matrix::Identity(4, 4)));
  // Initial gain: optimum of the reweighted problem (A, B, 40Q, R).
  DareSolution d = solve_dare(a, b, 40.0 * q.mat(), r.mat());
  LqrCost cost{std::move(q), std::move(r)};
  return Preset{std::move(sys), std::move(cost), Gain{d.K}};
}

}  // namespace lqrpg
