#include "attx/params.hpp"

#include "attx/rng.hpp"

#include <cmath>

namespace attx {

void init_params(std::vector<NamedParam>& params, std::uint64_t seed) {
    for (NamedParam& p : params) {
        switch (p.init) {
            case InitKind::zeros:
                for (double& v : p.tensor.vec()) v = 0.0;
                break;
            case InitKind::ones:
                for (double& v : p.tensor.vec()) v = 1.0;
                break;
            case InitKind::he_uniform: {
                Rng rng(seed, "init/" + p.name);
                const double bound = std::sqrt(6.0 / static_cast<double>(p.fan_in));
                for (double& v : p.tensor.vec()) v = rng.uniform(-bound, bound);
                break;
            }
            case InitKind::eye_plus_uniform: {
                Rng rng(seed, "init/" + p.name);
                const std::size_t n = p.tensor.extent(0);
                if (p.tensor.ndim() != 2 || p.tensor.extent(1) != n)
                    throw std::invalid_argument("eye_plus_uniform needs a square matrix: " + p.name);
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t c = 0; c < n; ++c)
                        p.tensor.vec()[r * n + c] = (r == c ? 1.0 : 0.0) + rng.uniform(-0.5, 0.5);
                break;
            }
        }
        p.tensor.zero_grad();
    }
}

}  // namespace attx
