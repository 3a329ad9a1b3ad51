#include "nonterm/cnf.hpp"

namespace nonterm {

CnfStats cnf_stats(const CnfInstance& inst) {
    return {static_cast<long long>(inst.variable_count),
            static_cast<long long>(inst.clause_count())};
}

bool model_satisfies(const CnfInstance& inst, const std::vector<bool>& model) {
    if (model.size() < static_cast<std::size_t>(inst.variable_count) + 1) return false;
    for (std::size_t i = 0; i < inst.clause_count(); ++i) {
        bool sat = false;
        for (int lit : inst.clause(i)) {
            int v = lit > 0 ? lit : -lit;
            if (model[v] == (lit > 0)) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

} // namespace nonterm
