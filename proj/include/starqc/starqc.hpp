#pragma once

// Umbrella header: the whole certification toolkit.

#include "starqc/certificate.hpp"
#include "starqc/corpus.hpp"
#include "starqc/domain.hpp"
#include "starqc/expr.hpp"
#include "starqc/json_io.hpp"
#include "starqc/models.hpp"
#include "starqc/scalar.hpp"
#include "starqc/star_inequality.hpp"
#include "starqc/verify.hpp"
