"""Min-plus products and APSP through the SSRP gadget."""
