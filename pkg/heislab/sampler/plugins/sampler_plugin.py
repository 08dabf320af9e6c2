from heislab.observe import Plugin, targets


class SamplerPlugin(Plugin):
    "Abstract class used only to track subclasses"
