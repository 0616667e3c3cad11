# Empty init file for routers package
