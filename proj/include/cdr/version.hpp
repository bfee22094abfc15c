#pragma once

#define CDR_VERSION "0.1.0"
