#pragma once

#include "hsparse/common.hpp"
#include "hsparse/convert.hpp"
#include "hsparse/expr.hpp"
#include "hsparse/io.hpp"
#include "hsparse/kernels.hpp"
#include "hsparse/spmat.hpp"
#include "hsparse/storage.hpp"
