# Scripts directory
