#include "lpexit/model.hpp"

namespace lpexit {

template struct PoolConfigT<double>;
template struct MarketParamsT<double>;
template struct FeeScheduleT<double>;
template struct PoolStateT<double>;

}  // namespace lpexit
