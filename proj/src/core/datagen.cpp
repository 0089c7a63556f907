#include "core/datagen.hpp"

#include <cmath>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace sign {

void SbmSpec::validate() const {
    require(num_nodes >= 1, ErrorCode::InvalidArgument, "sbm: num_nodes must be >= 1");
    require(num_blocks >= 1 && num_blocks <= num_nodes, ErrorCode::InvalidArgument,
            "sbm: num_blocks must be in [1, num_nodes]");
    require(p_out >= 0.0 && p_in <= 1.0 && p_out <= p_in, ErrorCode::InvalidArgument,
            "sbm: need 0 <= p_out <= p_in <= 1");
    require(feature_dim >= 1, ErrorCode::InvalidArgument, "sbm: feature_dim must be >= 1");
    require(feature_noise >= 0.0, ErrorCode::InvalidArgument,
            "sbm: feature_noise must be >= 0");
    require(train_frac >= 0.0 && val_frac >= 0.0 && test_frac >= 0.0,
            ErrorCode::InvalidArgument, "sbm: split fractions must be nonnegative");
    require(std::fabs(train_frac + val_frac + test_frac - 1.0) <= 1e-9,
            ErrorCode::InvalidArgument, "sbm: split fractions must sum to 1");
}

SbmData sbm_generate(const SbmSpec& spec) {
    spec.validate();
    const std::size_t n = spec.num_nodes;
    const std::size_t nb = spec.num_blocks;

    // contiguous blocks, remainder distributed to the earlier blocks
    std::vector<std::size_t> block(n);
    {
        const std::size_t base = n / nb;
        const std::size_t extra = n % nb;
        std::size_t node = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            const std::size_t size = base + (b < extra ? 1 : 0);
            for (std::size_t k = 0; k < size; ++k) block[node++] = b;
        }
    }

    SbmData out;

    Rng edge_rng(mix_seed(spec.seed, 0x65646765ull));    // edge stream
    Rng feature_rng(mix_seed(spec.seed, 0x66656174ull)); // feature stream
    Rng split_rng(mix_seed(spec.seed, 0x73706c74ull));   // split stream

    std::vector<Triplet> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = block[i] == block[j] ? spec.p_in : spec.p_out;
            if (edge_rng.uniform() < p) edges.push_back({i, j, 1.0});
        }
    }
    out.graph = graph_from_edges(n, edges, /*directed=*/false);

    out.features = DenseMatrix(n, spec.feature_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = out.features.row(i);
        row[block[i] % spec.feature_dim] = 1.0;
        for (std::size_t j = 0; j < spec.feature_dim; ++j)
            row[j] += spec.feature_noise * feature_rng.normal();
    }

    out.labels.task = TaskKind::Multiclass;
    out.labels.num_classes = nb;
    out.labels.classes = block;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    split_rng.shuffle(order);
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_frac * n));
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val_frac * n));
    out.splits.train.assign(order.begin(), order.begin() + n_train);
    out.splits.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    out.splits.test.assign(order.begin() + n_train + n_val, order.end());

    return out;
}

} // namespace sign
