from abc import ABCMeta, abstractmethod
import functools
import logging
import weakref

logger = logging.getLogger(__name__)


# Decorator to target specific messages.
def targets(target_messages, no_first=False):
    if isinstance(target_messages, str):
        target_messages = [target_messages]

    def wrapper(f):
        @functools.wraps(f)
        def _(self, *args, **kwargs):
            message = args[0]
            if message in target_messages:
                if no_first and kwargs.get("i") == 0:
                    return
                f(self, *args, **kwargs)
        return _

    return wrapper


class Observer(metaclass=ABCMeta):

    @abstractmethod
    def update(self, *args, **kwargs):
        pass


class Plugin(Observer):
    """Base for auto-registered observers.

    Every direct subclass of a plugin base is instantiated by
    Observable.register_plugins unless it sets DISABLED. Plugins whose
    constructor takes arguments are skipped.
    """
    DISABLED = False


class Observable:
    """Sends messages to its observers.

    Subclasses add the objects every observer needs (the chain state, the
    dynamics) by overriding message_context.
    """

    def __init__(self):
        self.observers = weakref.WeakSet()
        self.plugins = []

    def register(self, observer):
        self.observers.add(observer)

    def unregister(self, observer):
        self.observers.discard(observer)

    def unregister_all(self):
        self.observers.clear()
        self.plugins = []

    def register_plugin(self, p):
        # the observer set is weak; plugins are owned here
        self.plugins.append(p)
        self.register(p)

    def register_plugins(self, base):
        for cls in base.__subclasses__():
            if cls.DISABLED:
                continue
            try:
                p = cls()
            except TypeError:
                continue
            self.register_plugin(p)
            logger.log(logging.DEBUG - 1, "registered %s", cls.__name__)

    def message_context(self):
        return {}

    def update_observers(self, *args, **kwargs):
        kwargs.update(self.message_context())
        for observer in list(self.observers):
            observer.update(*args, **kwargs)

    def __getstate__(self):
        state = self.__dict__.copy()
        # Observers hold progress bars and loggers.
        del state["observers"]
        state["plugins"] = []
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self.observers = weakref.WeakSet()
