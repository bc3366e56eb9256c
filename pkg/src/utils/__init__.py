# This file can be empty
