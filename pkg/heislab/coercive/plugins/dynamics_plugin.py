from heislab.observe import Plugin, targets


class DynamicsPlugin(Plugin):
    "Abstract class used only to track subclasses"
