# shipped design files live next to this module
