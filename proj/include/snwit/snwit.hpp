#pragma once

#include "snwit/matrix.hpp"
#include "snwit/operator_basis.hpp"
#include "snwit/symmetric_measurement.hpp"
#include "snwit/rotations.hpp"
#include "snwit/positive_maps.hpp"
#include "snwit/states.hpp"
#include "snwit/witness.hpp"
#include "snwit/fedorov.hpp"
#include "snwit/serialization.hpp"
