#pragma once

#include "nucrec/bounds.hpp"
#include "nucrec/conditions.hpp"
#include "nucrec/ensemble.hpp"
#include "nucrec/errors.hpp"
#include "nucrec/experiments.hpp"
#include "nucrec/matcore.hpp"
#include "nucrec/recovery.hpp"
